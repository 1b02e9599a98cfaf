//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use erasure_mmse::average::{
    average_mmse_exact, average_mmse_mc, circulant_average_inverse, error_by_count, rank1_average,
    scalar_flat_optimum, worst_unitary_value,
};
use erasure_mmse::bounds::{
    eigmin_lower_bound, empirical_eigmin, empirical_tail, flat_support_bound,
    high_probability_bound, BoundParams, DEFAULT_C1, DEFAULT_C2,
};
use erasure_mmse::cwss::{aliasing_free_bound, equidistant_mmse, equidistant_pattern};
use erasure_mmse::linalg::{c, inverse_hpd};
use erasure_mmse::mmse::{empirical_mse, mmse_for_pattern, mmse_lower_bound_fixed_m};
use erasure_mmse::precoder::{
    euclidean_gradient, objective, objective_matrix, optimize, stationarity_residual,
    OptimizerConfig,
};
use erasure_mmse::seed::derive_seed;
use erasure_mmse::{
    effective_dof, make_dft, random_unitary, CMatrix, ChannelSpec, SamplingPattern, SourceModel,
    Spectrum, UnitaryTransform,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

/// Uniform draws in `[0, 1)` from a counter.
struct Stream {
    seed: u64,
    i: u64,
}

impl Stream {
    fn new(seed: u64) -> Self {
        Stream { seed, i: 0 }
    }

    fn next(&mut self) -> f64 {
        self.i += 1;
        (derive_seed(self.seed, self.i) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    fn spectrum(&mut self, n: usize, zero_prob: f64) -> Spectrum {
        loop {
            let l: Vec<f64> = (0..n)
                .map(|_| {
                    if self.next() < zero_prob {
                        0.0
                    } else {
                        self.range(0.05, 2.0)
                    }
                })
                .collect();
            if l.iter().any(|&v| v > 0.0) {
                return Spectrum::new(l).unwrap();
            }
        }
    }

    fn matrix(&mut self, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(self.range(-1.0, 1.0), self.range(-1.0, 1.0)))
    }
}

fn three_point_spectrum() -> Spectrum {
    Spectrum::new(vec![1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let want = [1.0, 65.0 / 24.0, 409.0 / 168.0, 61.0 / 84.0];
    let model = |u| SourceModel::new(u, three_point_spectrum()).unwrap();
    let e0 = error_by_count(&model(UnitaryTransform::counterexample()), 1.0)
        .map_err(err)?
        .e;
    let ef = error_by_count(&model(make_dft(3).unwrap()), 1.0)
        .map_err(err)?
        .e;
    let mut worst: f64 = 0.0;
    for m in 0..4 {
        let rel = (e0[m] - want[m]).abs() / want[m];
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || {
            format!("e{m}(U0) = {} vs {}", e0[m], want[m])
        })?;
    }
    ensure((ef[2] - 2.434555).abs() <= 1e-5, || {
        format!("e2(DFT) = {}", ef[2])
    })?;
    ensure(e0[2] < ef[2], || "e2(U0) is not below e2(DFT)".into())?;
    for k in 1..=9 {
        let ch = ChannelSpec::bernoulli(k as f64 / 10.0, 1.0).unwrap();
        let j0 =
            average_mmse_exact(&model(UnitaryTransform::counterexample()), &ch).map_err(err)?;
        let jf = average_mmse_exact(&model(make_dft(3).unwrap()), &ch).map_err(err)?;
        ensure(j0 < jf, || {
            format!("p = 0.{k}: J(U0) = {j0} >= J(DFT) = {jf}")
        })?;
    }
    Ok(format!(
        "error-by-count max rel gap {worst:.1e}, e2(DFT) = {:.7}, J(U0) < J(DFT) on p = 0.1..0.9",
        ef[2]
    ))
}

fn criterion_2() -> Outcome {
    let noise = 0.5;
    let ch = ChannelSpec::scalar(noise).unwrap();
    let mut cases = 0;
    let mut worst_gap: f64 = 0.0;
    for n in 2..=8 {
        for b in 1..=n {
            let s = Spectrum::bandpass(n, b, 1.0).unwrap();
            let dft = average_mmse_exact(
                &SourceModel::new(make_dft(n).unwrap(), s.clone()).unwrap(),
                &ch,
            )
            .map_err(err)?;
            let closed = scalar_flat_optimum(n, b, 1.0, noise).map_err(err)?;
            worst_gap = worst_gap.max((dft - closed).abs());
            ensure((dft - closed).abs() <= 1e-10, || {
                format!("N={n} |B|={b}: {dft} vs {closed}")
            })?;
            for d in 0..100u64 {
                let u = random_unitary(n, derive_seed(2, (n * 100 + b) as u64 * 1000 + d)).unwrap();
                let j = average_mmse_exact(&SourceModel::new(u, s.clone()).unwrap(), &ch)
                    .map_err(err)?;
                ensure(dft <= j + 1e-10, || {
                    format!("N={n} |B|={b}: Haar draw {d} gives {j} < {dft}")
                })?;
            }
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} flat spectra, closed-form gap {worst_gap:.1e}, DFT <= 100 Haar draws each"
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = Stream::new(3);
    let mut checked = 0;
    for n in [3, 5, 8] {
        let s = rng.spectrum(n, 0.0);
        let p_total = s.trace();
        let mut transforms = vec![UnitaryTransform::identity(n).unwrap(), make_dft(n).unwrap()];
        transforms
            .extend((0..50).map(|d| random_unitary(n, derive_seed(30 + n as u64, d)).unwrap()));
        for (label, ch, closed) in [
            (
                "scalar",
                ChannelSpec::scalar(0.0).unwrap(),
                p_total - p_total / n as f64,
            ),
            (
                "bernoulli",
                ChannelSpec::bernoulli(0.3, 0.0).unwrap(),
                0.7 * p_total,
            ),
        ] {
            let values: Vec<f64> = transforms
                .iter()
                .map(|u| {
                    average_mmse_exact(&SourceModel::new(u.clone(), s.clone()).unwrap(), &ch)
                        .unwrap()
                })
                .collect();
            let at_identity = values[0];
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ensure((at_identity - closed).abs() <= 1e-10, || {
                format!("{label} N={n}: J(I) = {at_identity} vs {closed}")
            })?;
            ensure(max <= at_identity + 1e-10, || {
                format!("{label} N={n}: max {max} exceeds J(I)")
            })?;
            let worst = worst_unitary_value(&s, &ch).map_err(err)?;
            ensure((worst - closed).abs() <= 1e-10, || {
                format!("{label} N={n}: worst value {worst}")
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} cases: J(I) = P - P/N (scalar) and (1-p)P (Bernoulli), no draw above it"
    ))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let mut l = vec![0.0; n];
        l[n / 2] = 1.5;
        let model = SourceModel::new(make_dft(n).unwrap(), Spectrum::new(l).unwrap()).unwrap();
        for p in [0.2f64, 0.5, 0.8] {
            let mut total = 0.0;
            for mask in 0..1u64 << n {
                let pat = SamplingPattern::from_mask(mask, n);
                let k = pat.len() as i32;
                let w = p.powi(k) * (1.0 - p).powi(n as i32 - k);
                total += w * mmse_for_pattern(&model, &pat, 0.6).map_err(err)?.error;
            }
            let closed = rank1_average(n, 1.5, 0.6, p).map_err(err)?;
            worst = worst.max((total - closed).abs());
            ensure((total - closed).abs() <= 1e-10, || {
                format!("N={n} p={p}: {closed} vs {total}")
            })?;
        }
    }
    Ok(format!(
        "N = 1..10, p in {{0.2, 0.5, 0.8}}, max gap {worst:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = Stream::new(5);
    let ch = ChannelSpec::bernoulli(0.5, 0.8).unwrap();
    let mut min_gain = f64::INFINITY;
    for trial in 0..100 {
        let n = 2 + trial % 5;
        let a = rng.matrix(n);
        let k_inv = &a * a.adjoint() + CMatrix::identity(n, n).scale(0.1);
        let j = |k_inv: &CMatrix| -> Result<f64, String> {
            let model =
                SourceModel::from_covariance(&inverse_hpd(k_inv).map_err(err)?).map_err(err)?;
            average_mmse_exact(&model, &ch).map_err(err)
        };
        let before = j(&k_inv)?;
        let after = j(&circulant_average_inverse(&k_inv).map_err(err)?)?;
        min_gain = min_gain.min(before - after);
        ensure(after <= before + 1e-10, || {
            format!("trial {trial}: {after} > {before}")
        })?;
    }
    Ok(format!(
        "100 random inverse covariances, smallest improvement {min_gain:.2e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = Stream::new(6);
    let mut comparisons = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=24 {
        let f = make_dft(n).unwrap();
        let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
        for k in 0..50 {
            let s = rng.spectrum(n, if k % 2 == 0 { 0.0 } else { 0.4 });
            let model = SourceModel::new(f.clone(), s.clone()).unwrap();
            for &d in &divisors {
                let pattern = equidistant_pattern(n, d).unwrap();
                for noise in [0.0, 0.1, 1.0] {
                    let closed = equidistant_mmse(&s, d, noise).map_err(err)?;
                    let direct = mmse_for_pattern(&model, &pattern, noise)
                        .map_err(err)?
                        .error;
                    worst = worst.max((closed - direct).abs());
                    ensure((closed - direct).abs() <= 1e-10, || {
                        format!("N={n} dN={d} s2={noise}: {closed} vs {direct}")
                    })?;
                    comparisons += 1;
                }
                let bound = aliasing_free_bound(&s, d).map_err(err)?;
                let e0 = equidistant_mmse(&s, d, 0.0).map_err(err)?;
                ensure(e0 <= bound + 1e-12, || {
                    format!("N={n} dN={d}: {e0} above bound {bound}")
                })?;
            }
        }
    }
    let ex = Spectrum::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
    let ex_val = equidistant_mmse(&ex, 2, 0.0).map_err(err)?;
    let ex_direct = mmse_for_pattern(
        &SourceModel::new(make_dft(4).unwrap(), ex).unwrap(),
        &equidistant_pattern(4, 2).unwrap(),
        0.0,
    )
    .map_err(err)?
    .error;
    ensure(
        (ex_val - 11.0 / 30.0).abs() <= 1e-12 && (ex_direct - 11.0 / 30.0).abs() <= 1e-10,
        || format!("two-sample example: {ex_val} / {ex_direct} vs 11/30"),
    )?;
    let bp = Spectrum::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
    let bp_val = equidistant_mmse(&bp, 2, 0.5).map_err(err)?;
    ensure((bp_val - 2.0 / 3.0).abs() <= 1e-12, || {
        format!("band-pass instance: {bp_val} vs 2/3")
    })?;
    Ok(format!("{comparisons} closed-form vs direct comparisons (max gap {worst:.1e}), 11/30 and 2/3 instances, alias bound held"))
}

fn criterion_7() -> Outcome {
    let mut rng = Stream::new(7);
    let mut patterns = 0;
    for n in 1..=8 {
        let s = rng.spectrum(n, 0.2);
        let noise = [0.05, 0.5, 2.0][n % 3];
        for u in [
            make_dft(n).unwrap(),
            UnitaryTransform::identity(n).unwrap(),
            random_unitary(n, 70 + n as u64).unwrap(),
        ] {
            let model = SourceModel::new(u, s.clone()).unwrap();
            for mask in 0..1u64 << n {
                let p = SamplingPattern::from_mask(mask, n);
                let lb = mmse_lower_bound_fixed_m(&s, p.len(), noise).map_err(err)?;
                let e = mmse_for_pattern(&model, &p, noise).map_err(err)?.error;
                ensure(lb <= e + 1e-10, || {
                    format!("N={n} mask {mask:b}: bound {lb} above {e}")
                })?;
                patterns += 1;
            }
        }
    }
    Ok(format!(
        "bound below the MMSE of all {patterns} patterns, N = 1..8"
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = Stream::new(8);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = 2 + k % 3;
        let s = rng.spectrum(n, 0.25);
        let ch = if k % 2 == 0 {
            ChannelSpec::bernoulli(rng.range(0.1, 0.9), rng.range(0.2, 2.0)).unwrap()
        } else {
            ChannelSpec::scalar(rng.range(0.2, 2.0)).unwrap()
        };
        let u = random_unitary(n, 800 + k as u64).unwrap();
        let g = euclidean_gradient(&u, &s, &ch).map_err(err)?;
        let z = rng.matrix(n);
        let plus = objective_matrix(&(u.matrix() + z.scale(h)), &s, &ch).map_err(err)?;
        let minus = objective_matrix(&(u.matrix() - z.scale(h)), &s, &ch).map_err(err)?;
        let fd = (plus - minus) / (2.0 * h);
        let analytic: f64 = 2.0
            * g.iter()
                .zip(z.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>();
        let rel = (fd - analytic).abs() / analytic.abs().max(1e-12);
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || {
            format!("instance {k}: relative gap {rel:.2e}")
        })?;
    }
    let mut max_res: f64 = 0.0;
    for n in 2..=6 {
        for b in 1..=n {
            let s = Spectrum::bandpass(n, b, 1.0).unwrap();
            let ch = ChannelSpec::scalar(0.3).unwrap();
            for u in [make_dft(n).unwrap(), UnitaryTransform::identity(n).unwrap()] {
                let r = stationarity_residual(&u, &s, &ch).map_err(err)?.residual;
                max_res = max_res.max(r);
                ensure(r <= 1e-8, || format!("N={n} |B|={b}: residual {r:.2e}"))?;
            }
        }
    }
    let s = three_point_spectrum();
    let ch = ChannelSpec::bernoulli(0.5, 1.0).unwrap();
    let j_u0 = objective(&UnitaryTransform::counterexample(), &s, &ch).map_err(err)?;
    let mut best = f64::INFINITY;
    for r in 0..10 {
        let out = optimize(
            &s,
            &ch,
            &random_unitary(3, derive_seed(88, r)).unwrap(),
            &OptimizerConfig::default(),
        )
        .map_err(err)?;
        ensure(out.trace.windows(2).all(|w| w[1] <= w[0]), || {
            format!("restart {r}: trace not monotone")
        })?;
        best = best.min(*out.trace.last().unwrap());
    }
    ensure(best <= j_u0 + 1e-6, || {
        format!("best restart {best} vs J(U0) = {j_u0}")
    })?;
    Ok(format!(
        "gradient max rel gap {worst:.1e}, stationarity residual <= {max_res:.1e}, best of 10 restarts {best:.9} vs J(U0) {j_u0:.9}"
    ))
}

fn criterion_9() -> Outcome {
    let trials = 100_000;
    let model =
        SourceModel::new(UnitaryTransform::counterexample(), three_point_spectrum()).unwrap();
    let pattern = SamplingPattern::subset(vec![0, 2]).unwrap();
    let mse = empirical_mse(&model, &pattern, 1.0, trials, 901).map_err(err)?;
    let z1 = (mse.mean - 17.0 / 21.0).abs() / mse.stderr;
    ensure(z1 <= 4.0, || {
        format!(
            "empirical MSE {} vs 17/21, {z1:.2} standard errors",
            mse.mean
        )
    })?;
    let ch = ChannelSpec::bernoulli(0.5, 1.0).unwrap();
    let exact = average_mmse_exact(&model, &ch).map_err(err)?;
    let avg = average_mmse_mc(&model, &ch, trials, 902).map_err(err)?;
    let z2 = (avg.mean - exact).abs() / avg.stderr;
    ensure(z2 <= 4.0, || {
        format!("average {} vs {exact}, {z2:.2} standard errors", avg.mean)
    })?;
    let dft =
        SourceModel::new(make_dft(8).unwrap(), Spectrum::bandpass(8, 3, 2.0).unwrap()).unwrap();
    let p8 = SamplingPattern::subset(vec![1, 4, 6]).unwrap();
    let mse8 = empirical_mse(&dft, &p8, 0.2, trials, 903).map_err(err)?;
    let exact8 = mmse_for_pattern(&dft, &p8, 0.2).map_err(err)?.error;
    let z3 = (mse8.mean - exact8).abs() / mse8.stderr;
    ensure(z3 <= 4.0, || {
        format!(
            "DFT band-pass MSE {} vs {exact8}, {z3:.2} standard errors",
            mse8.mean
        )
    })?;
    Ok(format!("10^5 trials each: |z| = {z1:.2}, {z2:.2}, {z3:.2}"))
}

fn criterion_10() -> Outcome {
    let mut rng = Stream::new(10);
    let mut finite = 0;
    let mut infinite = 0;
    for trial in 0..400 {
        let n = 16 + trial % 48;
        let s = Spectrum::geometric(n, rng.range(0.3, 0.9), 1.0).unwrap();
        let d = effective_dof(&s, 0.9);
        if 2 * d > n {
            continue;
        }
        let p = BoundParams {
            delta: 0.9,
            kappa: 1.0 + (n as f64 / d as f64 - 1.0) * rng.range(0.0, 0.99),
            theta: rng.range(0.05, 0.5),
            gamma: rng.range(0.05, 0.95),
            rho: rng.range(0.05, 0.99),
            epsilon: 0.1,
            m: 1 + (rng.next() * n as f64) as usize % n,
            n,
            noise_power: rng.range(0.01, 2.0),
            c1: DEFAULT_C1,
            c2: DEFAULT_C2,
        };
        let rep = high_probability_bound(&s, &p, 1.0).map_err(err)?;
        let eig = eigmin_lower_bound(&s, &p, 1.0).map_err(err)?;
        let c_i = rep.constants["C_I"];
        ensure((c_i > 0.0) == (0.5 * p.rho * p.rho * p.kappa > 1.0), || {
            format!("trial {trial}: C_I = {c_i}")
        })?;
        if c_i > 0.0 {
            let recomposed = (1.0 - p.delta) * s.trace() + d as f64 / eig;
            let rel = (rep.bound_value - recomposed).abs() / rep.bound_value;
            ensure(rel <= 1e-12, || {
                format!("trial {trial}: recomposition gap {rel:.2e}")
            })?;
            finite += 1;
        } else {
            ensure(rep.bound_value.is_infinite(), || {
                format!("trial {trial}: finite bound with C_I <= 0")
            })?;
            infinite += 1;
        }
    }
    let mut max_margin = f64::NEG_INFINITY;
    for n in [16, 64, 256, 1024, 10_000] {
        let s = Spectrum::geometric(n, 0.7, 1.0).unwrap();
        let d = effective_dof(&s, 0.9);
        let p = BoundParams {
            delta: 0.9,
            kappa: 2.0_f64.min(n as f64 / d as f64 - 0.5).max(1.0),
            theta: 0.5,
            gamma: 0.5,
            rho: 0.5,
            epsilon: 0.1,
            m: n,
            n,
            noise_power: 0.1,
            c1: DEFAULT_C1,
            c2: DEFAULT_C2,
        };
        let rep = high_probability_bound(&s, &p, 1.0).map_err(err)?;
        for cond in &rep.conditions[..2] {
            ensure(!cond.satisfied && cond.margin < 0.0, || {
                format!("N={n}: {} margin {}", cond.name, cond.margin)
            })?;
            max_margin = max_margin.max(cond.margin);
        }
    }
    let model = SourceModel::new(
        make_dft(32).unwrap(),
        Spectrum::bandpass(32, 4, 1.0).unwrap(),
    )
    .unwrap();
    let level = flat_support_bound(1.0, 4, 16, 32, 0.1).map_err(err)?;
    let tail = empirical_tail(&model, 16, 0.1, level, 10_000, 1001, true).map_err(err)?;
    ensure(tail <= 0.5, || format!("tail fraction {tail}"))?;
    let mut min_ratio = f64::INFINITY;
    for n in [8, 12, 16] {
        let s = rng.spectrum(n, 0.0);
        let model = SourceModel::new(make_dft(n).unwrap(), s.clone()).unwrap();
        for m in [0, n / 2, n, 2 * n] {
            let q = empirical_eigmin(&model, m, 0.5, 500, derive_seed(1002, (n * 100 + m) as u64))
                .map_err(err)?;
            let floor = 1.0 / s.max();
            min_ratio = min_ratio.min(q.min / floor);
            ensure(q.min >= floor * (1.0 - 1e-12), || {
                format!("N={n} M={m}: eigmin {} below {floor}", q.min)
            })?;
        }
    }
    Ok(format!(
        "recomposition on {finite} finite cases, {infinite} with C_I <= 0; largest desk-scale sample-count margin {max_margin:.2e}; tail fraction {tail}; eigmin/floor >= {min_ratio:.3}"
    ))
}

fn run_cli(args: &[&str], threads: &str, env: bool) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_erasure-mmse"));
    cmd.args(args);
    if env {
        cmd.env("ERASURE_MMSE_THREADS", threads);
    } else {
        cmd.env_remove("ERASURE_MMSE_THREADS")
            .args(["--threads", threads]);
    }
    let out = cmd.output().map_err(err)?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out.stdout)
}

fn criterion_11() -> Outcome {
    let runs: [&[&str]; 8] = [
        &[
            "mc",
            "--kind",
            "average",
            "--spectrum",
            "1/6,2/6,3/6",
            "--transform",
            "counterexample",
            "--trials",
            "20000",
            "--seed",
            "7",
        ],
        &[
            "mc",
            "--kind",
            "mse",
            "--spectrum",
            "bandpass:3",
            "--n",
            "8",
            "--pattern",
            "1,4,6",
            "--trials",
            "20000",
            "--seed",
            "8",
            "--format",
            "json",
        ],
        &[
            "mc",
            "--kind",
            "tail",
            "--spectrum",
            "bandpass:4",
            "--n",
            "32",
            "--m",
            "16",
            "--noise",
            "0.1",
            "--threshold",
            "0.3",
            "--trials",
            "2000",
            "--seed",
            "9",
        ],
        &[
            "optimize",
            "--spectrum",
            "1/6,2/6,3/6",
            "--restarts",
            "3",
            "--max-steps",
            "50",
            "--seed",
            "11",
        ],
        &[
            "average",
            "--spectrum",
            "1/6,2/6,3/6",
            "--transform",
            "counterexample",
        ],
        &[
            "mmse",
            "--spectrum",
            "geometric:0.6",
            "--n",
            "10",
            "--transform",
            "haar:3",
            "--all",
        ],
        &[
            "cwss",
            "--spectrum",
            "bandpass:3",
            "--n",
            "24",
            "--noise",
            "0.1",
        ],
        &[
            "bounds",
            "--spectrum",
            "geometric:0.7",
            "--n",
            "64",
            "--format",
            "json",
        ],
    ];
    let mut bytes = 0;
    for args in runs {
        let one = run_cli(args, "1", false)?;
        let four = run_cli(args, "4", false)?;
        let env_four = run_cli(args, "4", true)?;
        ensure(one == four && one == env_four, || {
            format!("{} differs across thread counts", args[0])
        })?;
        ensure(!one.is_empty(), || format!("{} wrote nothing", args[0]))?;
        bytes += one.len();
    }
    Ok(format!(
        "{} subcommand runs byte-identical at 1 and 4 threads ({bytes} bytes each pass)",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "counterexample reproduction",
            criterion_1,
            Some(Duration::from_secs(1)),
        ),
        (
            "flat-spectrum closed form vs enumeration",
            criterion_2,
            Some(Duration::from_secs(30)),
        ),
        ("noiseless worst transform", criterion_3, None),
        ("rank-one binomial sum", criterion_4, None),
        ("circulant averaging", criterion_5, None),
        ("equidistant sampling formulas", criterion_6, None),
        ("fixed-count lower bound", criterion_7, None),
        ("gradient and stationarity", criterion_8, None),
        (
            "Monte Carlo consistency",
            criterion_9,
            Some(Duration::from_secs(60)),
        ),
        ("high-probability suite", criterion_10, None),
        ("reproducibility across thread counts", criterion_11, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > *l => Err(format!(
                "took {:.2} s, limit {} s",
                elapsed.as_secs_f64(),
                l.as_secs()
            )),
            (o, _) => o,
        };
        let (mark, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!(
            "criterion {:>2} {mark} {name}: {detail} [{:.2} s]",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
