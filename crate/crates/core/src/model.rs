//! Source and channel data model.
//!
//! A source is `x = U w` with `w` a proper complex Gaussian vector of
//! independent components with variances `λ_i`, so that `K_x = U Λ U†`. The
//! eigenvalues are kept in the order the caller supplies them: equidistant
//! sampling indexes them by DFT frequency, while bounds that need a
//! descending order sort a copy.

use std::f64::consts::PI;

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, c, CMatrix};
use crate::{Error, Result};

/// Default unitarity tolerance on `max |U†U − I|`.
pub const DEFAULT_UNITARY_TOL: f64 = 1e-10;

/// Eigenvalues at or below `SUPPORT_EPS · P` are outside the support.
pub const SUPPORT_EPS: f64 = 1e-14;

/// Relative slack used when comparing cumulative eigenvalue sums to `δ·P`.
const DOF_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    lambdas: Vec<f64>,
    trace: f64,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidDimension("spectrum is empty".into()));
        }
        if let Some((i, v)) = lambdas
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalue {i} is {v}, expected a finite value >= 0"
            )));
        }
        let trace: f64 = lambdas.iter().sum();
        if trace <= 0.0 {
            return Err(Error::InvalidSpectrum("all eigenvalues are zero".into()));
        }
        Ok(Spectrum { lambdas, trace })
    }

    /// `P/N` on every index.
    pub fn flat(n: usize, power: f64) -> Result<Self> {
        Self::bandpass(n, n, power)
    }

    /// `P/|B|` on indices `0..band`, zero elsewhere.
    pub fn bandpass(n: usize, band: usize, power: f64) -> Result<Self> {
        if band == 0 || band > n {
            return Err(Error::InvalidDimension(format!(
                "band {band} must lie in 1..={n}"
            )));
        }
        let v = power / band as f64;
        Self::new((0..n).map(|i| if i < band { v } else { 0.0 }).collect())
    }

    /// `λ_i ∝ ratio^i`, scaled to total power `P`.
    pub fn geometric(n: usize, ratio: f64, power: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "geometric ratio {ratio} must be positive"
            )));
        }
        let raw: Vec<f64> = (0..n).map(|i| ratio.powi(i as i32)).collect();
        let s: f64 = raw.iter().sum();
        Self::new(raw.into_iter().map(|v| v * power / s).collect())
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Total power `P = Σ λ_i`.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn max(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    /// Indices with `λ_i > SUPPORT_EPS · P`, ascending.
    pub fn support(&self) -> Vec<usize> {
        let cut = SUPPORT_EPS * self.trace;
        (0..self.len()).filter(|&i| self.lambdas[i] > cut).collect()
    }

    pub fn sorted_descending(&self) -> Vec<f64> {
        let mut v = self.lambdas.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn is_full_support(&self) -> bool {
        self.support().len() == self.len()
    }
}

/// An `N×N` complex matrix with `max |U†U − I| ≤ τ_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryTransform {
    entries: CMatrix,
    tolerance: f64,
}

impl UnitaryTransform {
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_tolerance(entries, DEFAULT_UNITARY_TOL)
    }

    pub fn with_tolerance(entries: CMatrix, tolerance: f64) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "transform must be a nonempty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput(
                "transform has non-finite entries".into(),
            ));
        }
        let residual = unitarity_residual(&entries);
        if residual > tolerance {
            return Err(Error::NotUnitary {
                residual,
                tolerance,
            });
        }
        Ok(UnitaryTransform { entries, tolerance })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("N must be at least 1".into()));
        }
        Self::new(CMatrix::identity(n, n))
    }

    /// The three-point precoder that beats the DFT on the erasure channel
    /// with eigenvalues `(1/6, 2/6, 3/6)`.
    pub fn counterexample() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(h, 0.0),
                c(0.0, 0.0),
                c(h, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(-h, 0.0),
                c(0.0, 0.0),
                c(h, 0.0),
            ],
        );
        Self::new(m).expect("fixed matrix is orthogonal")
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn coherence(&self) -> f64 {
        coherence(self)
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.entries)
    }

    /// `U · diag(phases)`, rotating each column by `e^{jφ_k}`.
    pub fn with_column_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.n() {
            return Err(Error::InvalidDimension("one phase per column".into()));
        }
        let mut m = self.entries.clone();
        for (k, &phi) in phases.iter().enumerate() {
            let rot = Complex::from_polar(1.0, phi);
            for r in 0..m.nrows() {
                m[(r, k)] *= rot;
            }
        }
        Self::with_tolerance(m, self.tolerance)
    }

    /// Columns reordered so that new column `k` is old column `order[k]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&k| k >= n || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::InvalidInput(
                "column order must be a permutation".into(),
            ));
        }
        let m = CMatrix::from_fn(n, n, |r, k| self.entries[(r, order[k])]);
        Self::with_tolerance(m, self.tolerance)
    }
}

fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.ncols();
    linalg::max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// Unitary DFT matrix, `v_tk = e^{j2πtk/N} / √N`.
pub fn make_dft(n: usize) -> Result<UnitaryTransform> {
    if n == 0 {
        return Err(Error::InvalidDimension("N must be at least 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let m = CMatrix::from_fn(n, n, |t, k| {
        // Reduce t·k mod N first so the angle stays small for large N.
        let e = ((t * k) % n) as f64;
        Complex::from_polar(scale, 2.0 * PI * e / n as f64)
    });
    UnitaryTransform::new(m)
}

/// `μ(U) = √N · max |u_kj|`, in `[1, √N]` for unitary `U`.
pub fn coherence(u: &UnitaryTransform) -> f64 {
    (u.n() as f64).sqrt() * linalg::max_abs(u.matrix())
}

/// Smallest `D` with the `D` largest eigenvalues summing to at least `δ·P`.
pub fn effective_dof(spectrum: &Spectrum, delta: f64) -> usize {
    let sorted = spectrum.sorted_descending();
    let total: f64 = sorted.iter().sum();
    let target = delta * total - DOF_SLACK * total;
    let mut acc = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        if acc >= target {
            return i + 1;
        }
    }
    sorted.len()
}

/// Haar-distributed unitary from the phase-fixed QR factor of a matrix of
/// i.i.d. standard complex Gaussians. Deterministic per seed.
pub fn random_unitary(n: usize, seed: u64) -> Result<UnitaryTransform> {
    if n == 0 {
        return Err(Error::InvalidDimension("N must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re * s, im * s)
    });
    UnitaryTransform::new(linalg::phase_fixed_qr(&z))
}

/// A source `x = U w` with `E[ww†] = diag(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    transform: UnitaryTransform,
    spectrum: Spectrum,
}

impl SourceModel {
    pub fn new(transform: UnitaryTransform, spectrum: Spectrum) -> Result<Self> {
        if transform.n() != spectrum.len() {
            return Err(Error::InvalidDimension(format!(
                "transform is {n}x{n} but spectrum has {} entries",
                spectrum.len(),
                n = transform.n()
            )));
        }
        Ok(SourceModel {
            transform,
            spectrum,
        })
    }

    /// Eigendecomposes a Hermitian PSD covariance. Small negative eigenvalues
    /// from rounding are clamped to zero.
    pub fn from_covariance(k: &CMatrix) -> Result<Self> {
        if !k.is_square() || k.nrows() == 0 {
            return Err(Error::InvalidDimension("covariance must be square".into()));
        }
        let scale = linalg::max_abs(k).max(f64::MIN_POSITIVE);
        if !linalg::is_hermitian(k, 1e-12 * scale) {
            return Err(Error::InvalidInput("covariance is not Hermitian".into()));
        }
        let (values, vectors) = linalg::hermitian_eigen(k);
        let floor = -1e-10 * scale * k.nrows() as f64;
        if values.iter().any(|&v| v < floor) {
            return Err(Error::InvalidInput(
                "covariance is not positive semidefinite".into(),
            ));
        }
        let lambdas = values.into_iter().map(|v| v.max(0.0)).collect();
        Self::new(UnitaryTransform::new(vectors)?, Spectrum::new(lambdas)?)
    }

    pub fn n(&self) -> usize {
        self.spectrum.len()
    }

    pub fn transform(&self) -> &UnitaryTransform {
        &self.transform
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn power(&self) -> f64 {
        self.spectrum.trace()
    }

    pub fn covariance(&self) -> CMatrix {
        covariance(self)
    }

    /// Support indices `B`, the `N×|B|` columns `U_B` and `λ_B`.
    pub fn reduced(&self) -> (Vec<usize>, CMatrix, Vec<f64>) {
        let support = self.spectrum.support();
        let u = self.transform.matrix();
        let ub = CMatrix::from_fn(u.nrows(), support.len(), |r, k| u[(r, support[k])]);
        let lb = support
            .iter()
            .map(|&i| self.spectrum.lambdas()[i])
            .collect();
        (support, ub, lb)
    }
}

/// `K_x = U_B Λ_B U_B†`.
pub fn covariance(model: &SourceModel) -> CMatrix {
    let (_, ub, lb) = model.reduced();
    let mut scaled = ub.clone();
    for (k, &l) in lb.iter().enumerate() {
        scaled.column_mut(k).scale_mut(l);
    }
    let k = &scaled * ub.adjoint();
    linalg::hermitian_part(&k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelMode {
    /// Exactly one uniformly random component observed.
    Scalar,
    /// Every component observed independently with probability `p`.
    Bernoulli { p: f64 },
    /// A uniformly random subset of `m` components.
    UniformSubset { m: usize },
    /// `m` independent uniform draws, repeats kept.
    WithReplacement { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub noise_power: f64,
    pub mode: ChannelMode,
}

impl ChannelSpec {
    pub fn new(mode: ChannelMode, noise_power: f64) -> Result<Self> {
        if !(noise_power >= 0.0 && noise_power.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise power {noise_power} must be finite and >= 0"
            )));
        }
        if let ChannelMode::Bernoulli { p } = mode {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("p = {p} must lie in [0, 1]")));
            }
        }
        Ok(ChannelSpec { noise_power, mode })
    }

    pub fn scalar(noise_power: f64) -> Result<Self> {
        Self::new(ChannelMode::Scalar, noise_power)
    }

    pub fn bernoulli(p: f64, noise_power: f64) -> Result<Self> {
        Self::new(ChannelMode::Bernoulli { p }, noise_power)
    }

    pub fn uniform(m: usize, noise_power: f64) -> Result<Self> {
        Self::new(ChannelMode::UniformSubset { m }, noise_power)
    }

    pub fn with_replacement(m: usize, noise_power: f64) -> Result<Self> {
        Self::new(ChannelMode::WithReplacement { m }, noise_power)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let ChannelMode::UniformSubset { m } = self.mode {
            if m > n {
                return Err(Error::InvalidInput(format!(
                    "subset size {m} exceeds N = {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Realization of the sampling matrix `H`: the observed row indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SamplingPattern {
    indices: Vec<usize>,
    repeats: bool,
}

impl SamplingPattern {
    /// A set of distinct indices. The order given does not matter.
    pub fn subset(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPattern(format!(
                "index {} repeated in a subset pattern",
                w[0]
            )));
        }
        Ok(SamplingPattern {
            indices,
            repeats: false,
        })
    }

    /// A multiset of indices (sampling with replacement).
    pub fn multiset(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        SamplingPattern {
            indices,
            repeats: true,
        }
    }

    pub fn empty() -> Self {
        SamplingPattern {
            indices: Vec::new(),
            repeats: false,
        }
    }

    pub fn full(n: usize) -> Self {
        SamplingPattern {
            indices: (0..n).collect(),
            repeats: false,
        }
    }

    /// Subset whose members are the set bits of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        SamplingPattern {
            indices: (0..n).filter(|&i| mask >> i & 1 == 1).collect(),
            repeats: false,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn allows_repeats(&self) -> bool {
        self.repeats
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(&i) = self.indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidPattern(format!(
                "index {i} out of range for N = {n}"
            )));
        }
        if !self.repeats && self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPattern(
                "subset pattern must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}
