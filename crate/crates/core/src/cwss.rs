//! Equidistant sampling of circularly wide-sense stationary sources.
//!
//! With a DFT precoder, keeping every `ΔN`-th sample folds frequency `k` onto
//! `k mod M`, `M = N/ΔN`. Each alias group is an independent single-output
//! estimation problem. Eigenvalues are indexed by frequency and never sorted.

use crate::model::{SamplingPattern, Spectrum};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AliasDecomposition {
    pub m: usize,
    pub delta_n: usize,
    /// Group `k` holds `λ_{iM+k}` for `i = 0..ΔN`.
    pub groups: Vec<Vec<f64>>,
    /// `P^k`, the total power of group `k`.
    pub group_power: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AliasFreeSet {
    pub indices: Vec<usize>,
    pub power: f64,
}

fn check_divisor(n: usize, delta_n: usize) -> Result<usize> {
    if delta_n == 0 || !n.is_multiple_of(delta_n) {
        return Err(Error::InvalidInput(format!(
            "sample spacing {delta_n} does not divide N = {n}"
        )));
    }
    Ok(n / delta_n)
}

pub fn alias_decompose(spectrum: &Spectrum, delta_n: usize) -> Result<AliasDecomposition> {
    let lambdas = spectrum.lambdas();
    let m = check_divisor(lambdas.len(), delta_n)?;
    let groups: Vec<Vec<f64>> = (0..m)
        .map(|k| (0..delta_n).map(|i| lambdas[i * m + k]).collect())
        .collect();
    let group_power = groups.iter().map(|g| g.iter().sum()).collect();
    Ok(AliasDecomposition {
        m,
        delta_n,
        groups,
        group_power,
    })
}

/// MMSE in one band: `Σλ − Σλ² / (Σλ + ΔN σ²)` with `ΔN` the group length.
/// A silent band contributes zero.
pub fn per_band_error(group: &[f64], noise_power: f64) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::InvalidInput("alias group is empty".into()));
    }
    let power: f64 = group.iter().sum();
    let denom = power + group.len() as f64 * noise_power;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let sq: f64 = group.iter().map(|l| l * l).sum();
    Ok((power - sq / denom).max(0.0))
}

/// MMSE of observing samples `0, ΔN, 2ΔN, …` of the DFT-precoded source.
pub fn equidistant_mmse(spectrum: &Spectrum, delta_n: usize, noise_power: f64) -> Result<f64> {
    if !(noise_power >= 0.0 && noise_power.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise power {noise_power} must be finite and >= 0"
        )));
    }
    let dec = alias_decompose(spectrum, delta_n)?;
    dec.groups
        .iter()
        .map(|g| per_band_error(g, noise_power))
        .sum()
}

/// `P / (1 + SNR)` with `SNR = (P/|B|)(M/N)/σ²`, valid once `M ≥ |B|`.
pub fn bandpass_error(
    power: f64,
    band: usize,
    m: usize,
    n: usize,
    noise_power: f64,
) -> Result<f64> {
    if band == 0 || band > n || m == 0 || m > n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= |B| <= N and 1 <= M <= N, got |B| = {band}, M = {m}, N = {n}"
        )));
    }
    if m < band {
        return Err(Error::PreconditionViolation(format!(
            "M = {m} is below the band size {band}"
        )));
    }
    if !(noise_power > 0.0) {
        return Err(Error::InvalidInput("noise power must be positive".into()));
    }
    let snr = (power / band as f64) * (m as f64 / n as f64) / noise_power;
    Ok(power / (1.0 + snr))
}

/// One index of largest eigenvalue per alias group, lowest index on ties.
pub fn best_alias_free_set(spectrum: &Spectrum, delta_n: usize) -> Result<AliasFreeSet> {
    let lambdas = spectrum.lambdas();
    let m = check_divisor(lambdas.len(), delta_n)?;
    let mut indices = Vec::with_capacity(m);
    let mut power = 0.0;
    for k in 0..m {
        let mut best = k;
        for i in 1..delta_n {
            if lambdas[i * m + k] > lambdas[best] {
                best = i * m + k;
            }
        }
        indices.push(best);
        power += lambdas[best];
    }
    indices.sort_unstable();
    Ok(AliasFreeSet { indices, power })
}

/// Noiseless upper bound `2(P − P_J)`.
pub fn aliasing_free_bound(spectrum: &Spectrum, delta_n: usize) -> Result<f64> {
    let set = best_alias_free_set(spectrum, delta_n)?;
    Ok((2.0 * (spectrum.trace() - set.power)).max(0.0))
}

/// Rows `0, ΔN, 2ΔN, …` of an `N`-point signal.
pub fn equidistant_pattern(n: usize, delta_n: usize) -> Result<SamplingPattern> {
    let m = check_divisor(n, delta_n)?;
    SamplingPattern::subset((0..m).map(|i| i * delta_n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let s = spec(&[0.5, 0.25, 0.125, 0.125]);
        let d = alias_decompose(&s, 2).unwrap();
        assert_eq!(d.groups, vec![vec![0.5, 0.125], vec![0.25, 0.125]]);
        assert_eq!(d.group_power, vec![0.625, 0.375]);
        let d = alias_decompose(&s, 1).unwrap();
        assert_eq!(d.groups.len(), 4);
        assert!(matches!(
            alias_decompose(&s, 3),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn equidistant_examples() {
        let s = spec(&[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]);
        assert!((equidistant_mmse(&s, 1, 1.0).unwrap() - 61.0 / 84.0).abs() < 1e-15);
        let bp = spec(&[0.5, 0.5, 0.0, 0.0]);
        assert!((equidistant_mmse(&bp, 2, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let s = spec(&[0.5, 0.25, 0.125, 0.125]);
        assert!((equidistant_mmse(&s, 2, 0.0).unwrap() - 11.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn band_examples() {
        assert!((per_band_error(&[0.3, 0.3], 0.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(per_band_error(&[0.7, 0.0], 0.0).unwrap(), 0.0);
        assert_eq!(per_band_error(&[0.0, 0.0], 0.0).unwrap(), 0.0);
        assert!((per_band_error(&[0.5, 0.125], 0.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn bandpass_examples() {
        assert!((bandpass_error(1.0, 2, 2, 4, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((bandpass_error(1.0, 2, 2, 4, 1e15).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            bandpass_error(1.0, 3, 2, 4, 1.0),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn alias_free_examples() {
        let s = spec(&[0.5, 0.25, 0.125, 0.125]);
        let j = best_alias_free_set(&s, 2).unwrap();
        assert_eq!(j.indices, vec![0, 1]);
        assert!((j.power - 0.75).abs() < 1e-15);
        assert!((aliasing_free_bound(&s, 2).unwrap() - 0.5).abs() < 1e-15);

        let bl = spec(&[0.4, 0.6, 0.0, 0.0, 0.0, 0.0]);
        let j = best_alias_free_set(&bl, 3).unwrap();
        assert_eq!(j.indices, vec![0, 1]);
        assert_eq!(aliasing_free_bound(&bl, 3).unwrap(), 0.0);

        let tie = spec(&[0.25, 0.25, 0.25, 0.25]);
        assert_eq!(best_alias_free_set(&tie, 2).unwrap().indices, vec![0, 1]);
        assert!((aliasing_free_bound(&tie, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((equidistant_mmse(&tie, 2, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pattern_rows() {
        assert_eq!(equidistant_pattern(6, 2).unwrap().indices(), &[0, 2, 4]);
        assert!(equidistant_pattern(6, 4).is_err());
    }
}
