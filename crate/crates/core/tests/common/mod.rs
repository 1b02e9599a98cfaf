#![allow(dead_code)]

use erasure_mmse::{CMatrix, Spectrum, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Jordan inverse with partial pivoting. Panics on a singular input.
pub fn gj_inverse(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = CMatrix::identity(n, n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .unwrap();
        assert!(m[(piv, col)].norm() > 1e-300, "singular matrix");
        m.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let d = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[(i, col)];
                if f.norm() != 0.0 {
                    for j in 0..n {
                        let (mv, iv) = (m[(col, j)], inv[(col, j)]);
                        m[(i, j)] -= f * mv;
                        inv[(i, j)] -= f * iv;
                    }
                }
            }
        }
    }
    inv
}

/// `tr(K − K_{:,S} (K_{S,S} + σ² I)⁻¹ K_{S,:})` by direct inversion. Needs
/// the observed block to be invertible.
pub fn direct_mmse(k: &CMatrix, pattern: &[usize], noise_power: f64) -> f64 {
    let n = k.nrows();
    let m = pattern.len();
    let total: f64 = (0..n).map(|i| k[(i, i)].re).sum();
    if m == 0 {
        return total;
    }
    let mut ky = CMatrix::from_fn(m, m, |i, j| k[(pattern[i], pattern[j])]);
    for i in 0..m {
        ky[(i, i)] += C64::new(noise_power, 0.0);
    }
    let inv = gj_inverse(&ky);
    let mut explained = 0.0;
    for r in 0..n {
        for i in 0..m {
            for j in 0..m {
                explained += (k[(r, pattern[i])] * inv[(i, j)] * k[(pattern[j], r)]).re;
            }
        }
    }
    total - explained
}

/// `U diag(λ) U†` entry by entry.
pub fn covariance_oracle(u: &CMatrix, lambdas: &[f64]) -> CMatrix {
    let n = u.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| u[(i, k)] * u[(j, k)].conj() * lambdas[k])
            .sum()
    })
}

pub fn random_spectrum(rng: &mut impl Rng, n: usize) -> Spectrum {
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
    let s: f64 = v.iter().sum();
    Spectrum::new(v.into_iter().map(|x| x / s).collect()).unwrap()
}

/// Random spectrum where each entry is zero with probability `p_zero`,
/// keeping at least one positive entry.
pub fn random_sparse_spectrum(rng: &mut impl Rng, n: usize, p_zero: f64) -> Spectrum {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < p_zero {
                0.0
            } else {
                rng.random::<f64>() + 0.01
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.random_range(0..n)] = 1.0;
    }
    Spectrum::new(v).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

pub fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}
