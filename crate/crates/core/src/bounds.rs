//! High-probability MMSE bounds for random sampling and their empirical
//! counterparts.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::average::sample_pattern;
use crate::linalg::{self, c, CMatrix};
use crate::mmse::{check_noise, PatternSolver};
use crate::model::{effective_dof, ChannelMode, SourceModel, Spectrum};
use crate::parallel::ordered_map;
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Sample-complexity constant of the log-squared condition.
pub const DEFAULT_C1: f64 = 50963.0;
/// Sample-complexity constant of the failure-probability condition.
pub const DEFAULT_C2: f64 = 456.0;

/// Slack added to the tail-eigenvalue constant so its defining inequality
/// is strict.
const TAIL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub delta: f64,
    pub kappa: f64,
    pub theta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub m: usize,
    pub n: usize,
    pub noise_power: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let open01 = |v: f64| v > 0.0 && v < 1.0;
        let checks = [
            (
                self.delta > 0.0 && self.delta <= 1.0,
                "delta must lie in (0, 1]",
            ),
            (
                self.kappa >= 1.0 && self.kappa.is_finite(),
                "kappa must be >= 1",
            ),
            (
                self.theta > 0.0 && self.theta <= 0.5,
                "theta must lie in (0, 0.5]",
            ),
            (open01(self.gamma), "gamma must lie in (0, 1)"),
            (open01(self.rho), "rho must lie in (0, 1)"),
            (open01(self.epsilon), "epsilon must lie in (0, 1)"),
            (self.m >= 1 && self.n >= 1, "M and N must be positive"),
            (
                self.noise_power > 0.0 && self.noise_power.is_finite(),
                "noise power must be positive",
            ),
            (self.c1 > 0.0 && self.c2 > 0.0, "C1 and C2 must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::InvalidParams((*msg).into())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub satisfied: bool,
    /// Left side minus right side.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `+∞` when `C_I ≤ 0`.
    pub bound_value: f64,
    pub conditions: Vec<Condition>,
    pub constants: BTreeMap<String, f64>,
}

/// `P / (1 + σ⁻² (M/2N)(P/|B|))`.
pub fn flat_support_bound(
    power: f64,
    support_size: usize,
    m: usize,
    n: usize,
    noise_power: f64,
) -> Result<f64> {
    if support_size == 0 || n == 0 || m > n || !(power > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need P > 0, |B| >= 1 and M <= N, got P = {power}, |B| = {support_size}, M = {m}, N = {n}"
        )));
    }
    check_noise(noise_power)?;
    let snr = (0.5 * m as f64 / n as f64) * (power / support_size as f64) / noise_power;
    Ok(power / (1.0 + snr))
}

/// Smallest integer `M ≥ |B| μ² max(C1 ln|B|, C2 ln(3/δ))`.
pub fn flat_sample_condition(
    support_size: usize,
    mu: f64,
    delta_prob: f64,
    c1: f64,
    c2: f64,
) -> Result<u64> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidInput("C1 and C2 must be positive".into()));
    }
    if support_size == 0 || !(delta_prob > 0.0) || !(mu > 0.0) {
        return Err(Error::InvalidInput(
            "need |B| >= 1, mu > 0 and delta > 0".into(),
        ));
    }
    let b = support_size as f64;
    let rhs = b * mu * mu * (c1 * b.ln()).max(c2 * (3.0 / delta_prob).ln());
    // Undo rounding so that exact integers are not pushed to the next one.
    let guarded = rhs - rhs.abs() * 1e-12;
    Ok(guarded.ceil().max(0.0) as u64)
}

/// `(1−γ) C_κD / (C_κD + 1)`.
pub fn compressible_rho_max(gamma: f64, c_kd: f64) -> f64 {
    (1.0 - gamma) * c_kd / (c_kd + 1.0)
}

#[allow(clippy::too_many_arguments)]
fn sample_conditions(
    m: usize,
    n: usize,
    kappa_d: f64,
    mu: f64,
    theta: f64,
    epsilon: f64,
    c1: f64,
    c2: f64,
) -> [Condition; 2] {
    let mf = m as f64;
    let scale = mu * mu * kappa_d / (theta * theta);
    let lhs1 = mf / (10.0 * mf).ln();
    let rhs1 = c1 * scale * (100.0 * kappa_d).ln().powi(2) * (4.0 * n as f64).ln();
    let rhs2 = c2 * scale * (1.0 / epsilon).ln();
    [
        Condition {
            name: "log-squared sample count".into(),
            satisfied: lhs1 >= rhs1,
            margin: lhs1 - rhs1,
        },
        Condition {
            name: "failure-probability sample count".into(),
            satisfied: mf >= rhs2,
            margin: mf - rhs2,
        },
    ]
}

/// The two sample-count conditions of the sparse minimum-eigenvalue result,
/// with the default constants.
pub fn sparse_condition_check(
    m: usize,
    n: usize,
    kappa_d: f64,
    mu: f64,
    theta: f64,
    epsilon: f64,
) -> (bool, Vec<Condition>) {
    let conds = sample_conditions(m, n, kappa_d, mu, theta, epsilon, DEFAULT_C1, DEFAULT_C2);
    (conds.iter().all(|c| c.satisfied), conds.to_vec())
}

struct Constants {
    d: usize,
    power: f64,
    c_lambda_s: f64,
    c_lambda_i: f64,
    c_kd: f64,
    c_i: f64,
}

fn constants(spectrum: &Spectrum, params: &BoundParams) -> Result<Constants> {
    params.validate()?;
    let n = spectrum.len();
    if params.n != n {
        return Err(Error::InvalidParams(format!(
            "N = {} does not match the spectrum length {n}",
            params.n
        )));
    }
    if params.m > n {
        return Err(Error::InvalidParams(format!(
            "M = {} exceeds N = {n}",
            params.m
        )));
    }
    let desc = spectrum.sorted_descending();
    let power = spectrum.trace();
    let d = effective_dof(spectrum, params.delta);
    let ratio = n as f64 / d as f64;
    if params.kappa >= ratio {
        return Err(Error::InvalidParams(format!(
            "kappa = {} must be below N/D = {ratio}",
            params.kappa
        )));
    }
    let tail = (n - d) as f64;
    let c_lambda_s = desc[0] * d as f64 / power;
    let c_lambda_i = desc[d..]
        .iter()
        .fold(0.0f64, |a, &l| a.max(l * tail / power))
        + TAIL_SLACK;
    let c_kd = ((1.0 - params.theta) * params.m as f64 / n as f64).sqrt();
    let half_rho2 = 0.5 * params.rho * params.rho;
    let c_i = (half_rho2 * params.kappa - 1.0) * half_rho2 * tail / (c_lambda_i * n as f64);
    Ok(Constants {
        d,
        power,
        c_lambda_s,
        c_lambda_i,
        c_kd,
        c_i,
    })
}

/// High-probability upper bound on the MMSE under sampling with
/// replacement. The eigenvalues are sorted internally.
pub fn high_probability_bound(
    spectrum: &Spectrum,
    params: &BoundParams,
    mu: f64,
) -> Result<BoundReport> {
    let k = constants(spectrum, params)?;
    let p = k.power;
    let snr_term = params.gamma.powi(2) * k.c_kd.powi(2) * p / (params.noise_power * k.d as f64);
    let bound_value = if k.c_i > 0.0 {
        (1.0 - params.delta) * p + (p / k.c_i).max(p / (1.0 / k.c_lambda_s + snr_term))
    } else {
        f64::INFINITY
    };

    let kappa_d = params.kappa * k.d as f64;
    let [c40, c41] = sample_conditions(
        params.m,
        params.n,
        kappa_d,
        mu,
        params.theta,
        params.epsilon,
        params.c1,
        params.c2,
    );
    let m42 = 0.5 * params.rho * params.rho * params.kappa - 1.0;
    let m43 = compressible_rho_max(params.gamma, k.c_kd) - params.rho;
    let conditions = vec![
        c40,
        c41,
        Condition {
            name: "rho-kappa margin".into(),
            satisfied: m42 > 0.0,
            margin: m42,
        },
        Condition {
            name: "rho upper limit".into(),
            satisfied: m43 >= 0.0,
            margin: m43,
        },
    ];
    let constants = BTreeMap::from([
        ("C_I".to_string(), k.c_i),
        ("C_kD".to_string(), k.c_kd),
        ("C_lambda_I".to_string(), k.c_lambda_i),
        ("C_lambda_S".to_string(), k.c_lambda_s),
        ("D".to_string(), k.d as f64),
        ("eta".to_string(), kappa_d / params.n as f64),
        ("mu".to_string(), mu),
    ]);
    Ok(BoundReport {
        bound_value,
        conditions,
        constants,
    })
}

fn eigmin_from(k: &Constants, params: &BoundParams) -> f64 {
    let d = k.d as f64;
    let floor =
        d / (k.c_lambda_s * k.power) + params.gamma.powi(2) * k.c_kd.powi(2) / params.noise_power;
    if k.c_i > 0.0 {
        (k.c_i * d / k.power).min(floor)
    } else {
        0.0
    }
}

/// High-probability lower bound on `λ_min(Λ⁻¹ + σ⁻² (HU)†HU)`. Zero when
/// `C_I ≤ 0`.
pub fn eigmin_lower_bound(spectrum: &Spectrum, params: &BoundParams, _mu: f64) -> Result<f64> {
    let k = constants(spectrum, params)?;
    Ok(eigmin_from(&k, params))
}

/// Fraction of random size-`m` patterns whose MMSE is at least
/// `bound_value`. Patterns are uniform subsets, or `m` independent draws
/// when `replacement` is set.
pub fn empirical_tail(
    model: &SourceModel,
    m: usize,
    noise_power: f64,
    bound_value: f64,
    trials: usize,
    seed: u64,
    replacement: bool,
) -> Result<f64> {
    check_noise(noise_power)?;
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let n = model.n();
    let mode = if replacement {
        ChannelMode::WithReplacement { m }
    } else {
        if m > n {
            return Err(Error::InvalidInput(format!("M = {m} exceeds N = {n}")));
        }
        ChannelMode::UniformSubset { m }
    };
    let solver = PatternSolver::new(model, noise_power);
    let hits = ordered_map(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        solver.solve(&sample_pattern(mode, n, &mut rng)).error >= bound_value
    });
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigminQuantiles {
    pub min: f64,
    pub q01: f64,
    pub q50: f64,
}

/// Nearest-rank quantile of ascending `sorted`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Quantiles of `λ_min(Λ⁻¹ + σ⁻² (HU)†HU)` over patterns of `m` draws with
/// replacement.
pub fn empirical_eigmin(
    model: &SourceModel,
    m: usize,
    noise_power: f64,
    trials: usize,
    seed: u64,
) -> Result<EigminQuantiles> {
    if !(noise_power > 0.0 && noise_power.is_finite()) {
        return Err(Error::InvalidInput("noise power must be positive".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let spectrum = model.spectrum();
    if spectrum.lambdas().iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidInput(
            "minimum-eigenvalue sampling needs every eigenvalue positive".into(),
        ));
    }
    let n = model.n();
    let u = model.transform().matrix();
    let mut values = ordered_map(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let idx = sample_pattern(ChannelMode::WithReplacement { m }, n, &mut rng);
        let mut a = CMatrix::zeros(n, n);
        for &r in &idx {
            let row = u.row(r);
            a += row.adjoint() * row;
        }
        a.scale_mut(1.0 / noise_power);
        for (k, &l) in spectrum.lambdas().iter().enumerate() {
            a[(k, k)] += c(1.0 / l, 0.0);
        }
        linalg::hermitian_eigenvalues(&a)[0]
    });
    values.sort_by(f64::total_cmp);
    Ok(EigminQuantiles {
        min: values[0],
        q01: quantile(&values, 0.01),
        q50: quantile(&values, 0.5),
    })
}
