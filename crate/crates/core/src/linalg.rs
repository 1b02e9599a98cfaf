//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(A + A†) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs(&(a - a.adjoint())) <= tol
}

pub fn real_trace(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn inverse_hpd(a: &CMatrix) -> Result<CMatrix> {
    cholesky_hpd(a)
        .map(|ch| ch.inverse())
        .ok_or_else(|| Error::NumericalFailure("matrix is not positive definite".into()))
}

/// Cholesky factor of a Hermitian positive-definite matrix, or `None`.
///
/// `nalgebra` takes complex square roots of the pivots, so a negative pivot
/// does not fail on its own; the factor is rejected unless every pivot is
/// real and positive.
pub fn cholesky_hpd(a: &CMatrix) -> Option<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let ch = a.clone().cholesky()?;
    let l = ch.l_dirty();
    let ok = (0..l.nrows()).all(|k| {
        let d = l[(k, k)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(ch)
}

/// `tr(A⁻¹)` for Hermitian positive-definite `A`.
pub fn trace_inverse_hpd(a: &CMatrix) -> Result<f64> {
    inverse_hpd(a).map(|inv| real_trace(&inv))
}

/// Moore-Penrose pseudo-inverse of a Hermitian matrix. Eigenvalues with
/// magnitude at or below `threshold` are treated as zero. Returns the
/// pseudo-inverse and the numerical rank.
pub fn pinv_hermitian(a: &CMatrix, threshold: f64) -> (CMatrix, usize) {
    let n = a.nrows();
    if n == 0 {
        return (CMatrix::zeros(0, 0), 0);
    }
    let (values, vectors) = hermitian_eigen(a);
    let mut out = CMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &ev) in values.iter().enumerate() {
        if ev.abs() > threshold {
            rank += 1;
            let v = vectors.column(k);
            out += (v * v.adjoint()).scale(1.0 / ev);
        }
    }
    (out, rank)
}

/// Unitary factor of a QR decomposition with the phases of `diag(R)` moved
/// into `Q`, so that `R` has a nonnegative real diagonal. For a square input
/// of full rank this is unique. For a tall input it returns the thin factor.
pub fn phase_fixed_qr(a: &CMatrix) -> CMatrix {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..q.ncols().min(r.nrows()) {
        let d = r[(k, k)];
        let m = d.norm();
        if m > 0.0 {
            let phase = d / m;
            for row in 0..q.nrows() {
                q[(row, k)] *= phase;
            }
        }
    }
    q
}
