//! MMSE averaged over random sampling channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMatrix};
use crate::mmse::{check_noise, EmpiricalMse, PatternSolver};
use crate::model::{ChannelMode, ChannelSpec, SourceModel, Spectrum};
use crate::parallel::{ordered_block_fold, ordered_map};
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Largest `N` for which all `2^N` patterns are enumerated.
pub const MAX_EXACT_N: usize = 20;

/// `e[m]` is the MMSE summed over every size-`m` subset of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorByCount {
    pub e: Vec<f64>,
}

impl ErrorByCount {
    pub fn n(&self) -> usize {
        self.e.len() - 1
    }

    /// Mean MMSE over the size-`m` subsets, `e[m] / C(N, m)`.
    pub fn per_pattern(&self, m: usize) -> f64 {
        self.e[m] / binomial(self.n(), m)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Probability `p^k (1−p)^{N−k}` of one particular size-`k` subset.
pub fn subset_probability(n: usize, k: usize, p: f64) -> f64 {
    (xlogy(k as f64, p) + xlogy((n - k) as f64, 1.0 - p)).exp()
}

/// `C(N,k) p^k (1−p)^{N−k}` for `k = 0..=N`, via logarithms.
pub fn binomial_weights(n: usize, p: f64) -> Vec<f64> {
    let mut log_c = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            (log_c + xlogy(k as f64, p) + xlogy((n - k) as f64, 1.0 - p)).exp()
        })
        .collect()
}

fn check_exact_size(n: usize) -> Result<()> {
    if n > MAX_EXACT_N {
        return Err(Error::ResourceLimit(format!(
            "exact enumeration is limited to N <= {MAX_EXACT_N}, got N = {n}; use Monte Carlo"
        )));
    }
    Ok(())
}

/// Sums the MMSE over all subsets grouped by size. `σ² = 0` is accepted and
/// handled by the pseudo-inverse path.
pub fn error_by_count(model: &SourceModel, noise_power: f64) -> Result<ErrorByCount> {
    check_noise(noise_power)?;
    let n = model.n();
    check_exact_size(n)?;
    let solver = PatternSolver::new(model, noise_power);
    let e = ordered_block_fold(
        1usize << n,
        || vec![0.0; n + 1],
        |acc, mask| {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            acc[idx.len()] += solver.solve(&idx).error;
        },
        |total, part| {
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        },
    );
    Ok(ErrorByCount { e })
}

/// Exact average MMSE for the scalar, Bernoulli and uniform-subset channels.
pub fn average_mmse_exact(model: &SourceModel, channel: &ChannelSpec) -> Result<f64> {
    let n = model.n();
    channel.validate(n)?;
    let s2 = channel.noise_power;
    check_noise(s2)?;
    match channel.mode {
        ChannelMode::Scalar => {
            let solver = PatternSolver::new(model, s2);
            let total: f64 = (0..n).map(|i| solver.solve(&[i]).error).sum();
            Ok(total / n as f64)
        }
        ChannelMode::Bernoulli { p } => {
            let e = error_by_count(model, s2)?;
            Ok(e.e
                .iter()
                .enumerate()
                .map(|(k, e)| subset_probability(n, k, p) * e)
                .sum())
        }
        ChannelMode::UniformSubset { m } => Ok(error_by_count(model, s2)?.per_pattern(m)),
        ChannelMode::WithReplacement { .. } => Err(Error::InvalidInput(
            "exact averaging is not available for sampling with replacement".into(),
        )),
    }
}

/// Draws one pattern from the channel.
pub fn sample_pattern(mode: ChannelMode, n: usize, rng: &mut impl Rng) -> Vec<usize> {
    match mode {
        ChannelMode::Scalar => vec![rng.random_range(0..n)],
        ChannelMode::Bernoulli { p } => (0..n).filter(|_| rng.random::<f64>() < p).collect(),
        ChannelMode::UniformSubset { m } => {
            let mut v = rand::seq::index::sample(rng, n, m).into_vec();
            v.sort_unstable();
            v
        }
        ChannelMode::WithReplacement { m } => {
            let mut v: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
            v.sort_unstable();
            v
        }
    }
}

/// Monte Carlo average of the per-pattern MMSE. Trial `i` draws its pattern
/// from `derive_seed(seed, i)`.
pub fn average_mmse_mc(
    model: &SourceModel,
    channel: &ChannelSpec,
    trials: usize,
    seed: u64,
) -> Result<EmpiricalMse> {
    if trials < 2 {
        return Err(Error::InvalidInput("at least 2 trials are required".into()));
    }
    let n = model.n();
    channel.validate(n)?;
    check_noise(channel.noise_power)?;
    let solver = PatternSolver::new(model, channel.noise_power);
    let errs = ordered_map(trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        solver
            .solve(&sample_pattern(channel.mode, n, &mut rng))
            .error
    });
    Ok(EmpiricalMse::from_samples(&errs, seed))
}

/// Optimal scalar-channel MMSE for a flat spectrum on `|B|` of `N`
/// coordinates, attained by a constant-diagonal covariance.
pub fn scalar_flat_optimum(
    n: usize,
    support_size: usize,
    power: f64,
    noise_power: f64,
) -> Result<f64> {
    if support_size == 0 || support_size > n {
        return Err(Error::InvalidInput(format!(
            "support size {support_size} must lie in 1..={n}"
        )));
    }
    if !(power > 0.0 && noise_power > 0.0) {
        return Err(Error::InvalidInput(
            "P and noise power must be positive".into(),
        ));
    }
    let per = power / support_size as f64;
    Ok(power - per + per / (1.0 + power / (n as f64 * noise_power)))
}

/// Minimum Bernoulli-channel MMSE for a rank-one source whose eigenvector has
/// constant modulus `1/√N`.
pub fn rank1_average(n: usize, power: f64, noise_power: f64, p: f64) -> Result<f64> {
    if !(power > 0.0 && noise_power > 0.0) {
        return Err(Error::InvalidInput(
            "P and noise power must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("p = {p} must lie in [0, 1]")));
    }
    let nf = n as f64;
    Ok(binomial_weights(n, p)
        .iter()
        .enumerate()
        .map(|(k, w)| w / (1.0 / power + k as f64 / (nf * noise_power)))
        .sum())
}

/// Largest noiseless average MMSE over all transforms, attained by `U = I`.
pub fn worst_unitary_value(spectrum: &Spectrum, channel: &ChannelSpec) -> Result<f64> {
    if channel.noise_power != 0.0 {
        return Err(Error::Unsupported(
            "the worst-transform value is only known for noiseless channels".into(),
        ));
    }
    let p = spectrum.trace();
    match channel.mode {
        ChannelMode::Scalar => Ok(p - p / spectrum.len() as f64),
        ChannelMode::Bernoulli { p: q } => Ok((1.0 - q) * p),
        _ => Err(Error::InvalidInput(
            "worst-transform value needs a scalar or Bernoulli channel".into(),
        )),
    }
}

/// Average of `Π^l A (Π^l)†` over all cyclic shifts `Π^l`.
pub fn circulant_average_inverse(k_inv: &CMatrix) -> Result<CMatrix> {
    if !k_inv.is_square() || k_inv.nrows() == 0 {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let scale = linalg::max_abs(k_inv);
    if !linalg::is_hermitian(k_inv, 1e-12 * scale) {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    if linalg::cholesky_hpd(k_inv).is_none() {
        return Err(Error::InvalidInput(
            "matrix is not positive definite".into(),
        ));
    }
    let n = k_inv.nrows();
    let out = CMatrix::from_fn(n, n, |i, j| {
        let s: crate::C64 = (0..n).map(|l| k_inv[((i + l) % n, (j + l) % n)]).sum();
        s / n as f64
    });
    Ok(linalg::hermitian_part(&out))
}
