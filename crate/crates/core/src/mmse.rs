//! Per-pattern MMSE, the LMMSE estimator and Monte Carlo checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, c, CMatrix, CVector};
use crate::model::{SamplingPattern, SourceModel, Spectrum};
use crate::parallel::ordered_map;
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Relative cutoff for eigenvalues of `K_y` treated as zero.
pub const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmseMethod {
    Woodbury,
    PseudoInverse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseResult {
    pub error: f64,
    pub method: MmseMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMse {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl EmpiricalMse {
    /// Mean and standard error of the mean, summed in slice order.
    pub(crate) fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        EmpiricalMse {
            mean,
            stderr: (var / n).sqrt(),
            trials: samples.len(),
            seed,
        }
    }
}

pub(crate) fn check_noise(noise_power: f64) -> Result<()> {
    if noise_power >= 0.0 && noise_power.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "noise power {noise_power} must be finite and >= 0"
        )))
    }
}

fn check_pattern(model: &SourceModel, pattern: &SamplingPattern) -> Result<()> {
    pattern.validate(model.n())
}

/// MMSE of estimating `x` from `y = Hx + n` for one realization of `H`.
///
/// With `σ² > 0` this inverts the `|B|×|B|` matrix
/// `Λ_B⁻¹ + σ⁻² U_B† H†H U_B`. With `σ² = 0`, or when that matrix is too
/// ill-conditioned to factor, it falls back to the pseudo-inverse of `K_y`.
pub fn mmse_for_pattern(
    model: &SourceModel,
    pattern: &SamplingPattern,
    noise_power: f64,
) -> Result<MmseResult> {
    check_noise(noise_power)?;
    check_pattern(model, pattern)?;
    Ok(PatternSolver::new(model, noise_power).solve(pattern.indices()))
}

/// Per-model state reused across many patterns of the same model.
pub(crate) struct PatternSolver<'a> {
    model: &'a SourceModel,
    noise_power: f64,
    ub: CMatrix,
    prior: Vec<f64>,
    covariance: std::sync::OnceLock<CMatrix>,
}

impl<'a> PatternSolver<'a> {
    /// `noise_power` must already be validated.
    pub(crate) fn new(model: &'a SourceModel, noise_power: f64) -> Self {
        let (_, ub, lb) = model.reduced();
        PatternSolver {
            model,
            noise_power,
            ub,
            prior: lb.iter().map(|l| 1.0 / l).collect(),
            covariance: std::sync::OnceLock::new(),
        }
    }

    /// `indices` must be in range for the model.
    pub(crate) fn solve(&self, indices: &[usize]) -> MmseResult {
        let p = self.model.power();
        if indices.is_empty() {
            return MmseResult {
                error: p,
                method: MmseMethod::Woodbury,
            };
        }
        let s2 = self.noise_power;
        if s2 > SINGULAR_EPS * (p + s2) {
            if let Ok(error) = self.woodbury(indices) {
                return MmseResult {
                    error: error.clamp(0.0, p),
                    method: MmseMethod::Woodbury,
                };
            }
        }
        let k = self.covariance.get_or_init(|| self.model.covariance());
        MmseResult {
            error: direct_error(k, p, indices, s2),
            method: MmseMethod::PseudoInverse,
        }
    }

    fn woodbury(&self, indices: &[usize]) -> Result<f64> {
        let b = self.prior.len();
        let mut a = CMatrix::zeros(b, b);
        for &i in indices {
            let row = self.ub.row(i);
            a += row.adjoint() * row;
        }
        a.scale_mut(1.0 / self.noise_power);
        for (k, &inv) in self.prior.iter().enumerate() {
            a[(k, k)] += c(inv, 0.0);
        }
        linalg::trace_inverse_hpd(&linalg::hermitian_part(&a))
    }
}

fn direct_error(k: &CMatrix, p: f64, indices: &[usize], noise_power: f64) -> f64 {
    let (cross, ky) = observation_blocks(k, indices, noise_power);
    let (pinv, _) = linalg::pinv_hermitian(&ky, SINGULAR_EPS * (p + noise_power));
    let explained = linalg::real_trace(&(&cross * pinv * cross.adjoint()));
    (p - explained).clamp(0.0, p)
}

/// Rows `pattern` of `K_x` (as `K_x H†`, `N×m`) and `H K_x H† + σ² I`.
fn observation_blocks(k: &CMatrix, idx: &[usize], noise_power: f64) -> (CMatrix, CMatrix) {
    let m = idx.len();
    let cross = CMatrix::from_fn(k.nrows(), m, |r, j| k[(r, idx[j])]);
    let mut ky = CMatrix::from_fn(m, m, |i, j| k[(idx[i], idx[j])]);
    for i in 0..m {
        ky[(i, i)] += c(noise_power, 0.0);
    }
    (cross, ky)
}

/// `tr(K_x − K_x H† (H K_x H† + σ² I)⁺ H K_x)` on the full `N×N` covariance.
pub fn mmse_direct(
    model: &SourceModel,
    pattern: &SamplingPattern,
    noise_power: f64,
) -> Result<f64> {
    check_noise(noise_power)?;
    check_pattern(model, pattern)?;
    Ok(direct_error(
        &model.covariance(),
        model.power(),
        pattern.indices(),
        noise_power,
    ))
}

/// The LMMSE gain `K_x H† (H K_x H† + σ² I)⁺`, `N×m`.
pub fn lmmse_gain(
    model: &SourceModel,
    pattern: &SamplingPattern,
    noise_power: f64,
) -> Result<CMatrix> {
    check_noise(noise_power)?;
    check_pattern(model, pattern)?;
    let k = model.covariance();
    let (cross, ky) = observation_blocks(&k, pattern.indices(), noise_power);
    let (pinv, _) = linalg::pinv_hermitian(&ky, SINGULAR_EPS * (model.power() + noise_power));
    Ok(cross * pinv)
}

pub fn lmmse_estimate(
    model: &SourceModel,
    pattern: &SamplingPattern,
    noise_power: f64,
    y: &CVector,
) -> Result<CVector> {
    if y.len() != pattern.len() {
        return Err(Error::InvalidInput(format!(
            "observation has {} entries but the pattern has {}",
            y.len(),
            pattern.len()
        )));
    }
    Ok(lmmse_gain(model, pattern, noise_power)? * y)
}

/// `U Λ^{1/2}`, the colouring matrix applied to white `w`.
fn colouring(model: &SourceModel) -> CMatrix {
    let mut a = model.transform().matrix().clone();
    for (k, &l) in model.spectrum().lambdas().iter().enumerate() {
        a.column_mut(k).scale_mut(l.sqrt());
    }
    a
}

fn draw(
    colour: &CMatrix,
    pattern: &SamplingPattern,
    noise_power: f64,
    seed: u64,
) -> (CVector, CVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut gauss = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re * s, im * s)
    };
    let w = CVector::from_fn(colour.ncols(), |_, _| gauss());
    let x = colour * w;
    let sd = noise_power.sqrt();
    let y = CVector::from_fn(pattern.len(), |j, _| x[pattern.indices()[j]] + gauss() * sd);
    (x, y)
}

/// One draw of `(x, y)`. Deterministic per seed.
pub fn sample_source(
    model: &SourceModel,
    noise_power: f64,
    pattern: &SamplingPattern,
    seed: u64,
) -> Result<(CVector, CVector)> {
    check_noise(noise_power)?;
    check_pattern(model, pattern)?;
    Ok(draw(&colouring(model), pattern, noise_power, seed))
}

/// Mean and standard error of `‖x − x̂‖²`. Trial `i` uses
/// `derive_seed(seed, i)`, and the mean is summed in trial order.
pub fn empirical_mse(
    model: &SourceModel,
    pattern: &SamplingPattern,
    noise_power: f64,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalMse> {
    if trials < 2 {
        return Err(Error::InvalidInput("at least 2 trials are required".into()));
    }
    let gain = lmmse_gain(model, pattern, noise_power)?;
    let colour = colouring(model);
    let errs = ordered_map(trials, |i| {
        let (x, y) = draw(&colour, pattern, noise_power, derive_seed(seed, i as u64));
        (x - &gain * y).norm_squared()
    });
    Ok(EmpiricalMse::from_samples(&errs, seed))
}

/// Lower bound on the MMSE of any size-`m` pattern: the `N − m` smallest
/// eigenvalues go unobserved, and the `m` smallest are each Wiener-filtered
/// at noise `σ²`.
pub fn mmse_lower_bound_fixed_m(spectrum: &Spectrum, m: usize, noise_power: f64) -> Result<f64> {
    check_noise(noise_power)?;
    let n = spectrum.len();
    if m > n {
        return Err(Error::InvalidInput(format!("M = {m} exceeds N = {n}")));
    }
    let desc = spectrum.sorted_descending();
    let unobserved: f64 = desc[m..].iter().sum();
    let filtered: f64 = desc[n - m..]
        .iter()
        .map(|&l| {
            if l > 0.0 {
                l * noise_power / (l + noise_power)
            } else {
                0.0
            }
        })
        .sum();
    Ok(unobserved + filtered)
}
