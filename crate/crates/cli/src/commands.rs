//! One driver per subcommand. Each returns the table it would emit.
//!
//! Column orders:
//! - `mmse`: pattern, size, mmse, method
//! - `average`: p, J_U, J_dft, J_identity
//! - `cwss`: delta_n, m, mmse, noiseless_alias_bound, bandpass_formula
//! - `bounds`: bound, eigmin_floor, then `<condition>_ok` and
//!   `<condition>_margin` for log_squared_count, failure_prob_count,
//!   rho_kappa and rho_limit, then C_I, C_kD, C_lambda_I, C_lambda_S, D, eta, mu
//! - `optimize`: restart, start, steps, converged, residual, initial_objective, objective, best
//! - `mc`, kind mse or average: kind, trials, seed, mean, stderr, exact
//! - `mc`, kind tail: kind, trials, seed, m, threshold, fraction
//! - `mc`, kind eigmin: kind, trials, seed, m, min, q01, q50
//! - `verify-paper`: item, passed, detail

use erasure_mmse::average::{average_mmse_exact, average_mmse_mc, MAX_EXACT_N};
use erasure_mmse::bounds::{
    eigmin_lower_bound, empirical_eigmin, empirical_tail, high_probability_bound, BoundParams,
    DEFAULT_C1, DEFAULT_C2,
};
use erasure_mmse::cwss::{aliasing_free_bound, bandpass_error, equidistant_mmse};
use erasure_mmse::mmse::{empirical_mse, mmse_for_pattern, MmseMethod};
use erasure_mmse::precoder::{objective, optimize, OptimizerConfig};
use erasure_mmse::seed::derive_seed;
use erasure_mmse::verify::{run_checklist, CheckItem, Fixture};
use erasure_mmse::{
    effective_dof, make_dft, random_unitary, ChannelMode, SamplingPattern, SourceModel, Spectrum,
    UnitaryTransform,
};

use crate::config::{
    AverageOpts, BoundsOpts, Command, CwssOpts, McOpts, MmseOpts, OptimizeOpts, Run, VerifyOpts,
};
use crate::error::CliError;
use crate::parse::{self, Preset};
use crate::table::{Cell, Table};

const DEFAULT_NOISE: f64 = 1.0;
const DEFAULT_TRIALS: usize = 10_000;
const MAX_LISTED_N: usize = 16;

pub enum Outcome {
    Table(Table),
    Checklist { table: Table, items: Vec<CheckItem> },
}

pub fn run(run: &Run) -> Result<Outcome, CliError> {
    let table = match &run.command {
        Command::Mmse(o) => mmse(o)?,
        Command::Average(o) => average(o)?,
        Command::Cwss(o) => cwss(o)?,
        Command::Bounds(o) => bounds(o)?,
        Command::Optimize(o) => optimize_cmd(o, run.seed)?,
        Command::Mc(o) => mc(o, run.seed)?,
        Command::VerifyPaper(o) => {
            let (table, items) = verify(o, run.seed);
            return Ok(Outcome::Checklist { table, items });
        }
    };
    Ok(Outcome::Table(table))
}

fn spectrum_of(
    spectrum: &Option<String>,
    n: Option<usize>,
    power: Option<f64>,
) -> Result<(Spectrum, Preset), CliError> {
    let text = spectrum
        .as_deref()
        .ok_or_else(|| CliError::field("spectrum", "required"))?;
    parse::spectrum(text, n, power.unwrap_or(1.0))
}

fn model_of(spectrum: Spectrum, transform: &Option<String>) -> Result<SourceModel, CliError> {
    let u = parse::transform(transform.as_deref().unwrap_or("dft"), spectrum.len())?;
    Ok(SourceModel::new(u, spectrum)?)
}

fn mmse(o: &MmseOpts) -> Result<Table, CliError> {
    let (s, _) = spectrum_of(&o.spectrum, o.n, o.power)?;
    let model = model_of(s, &o.transform)?;
    let n = model.n();
    let noise = o.noise.unwrap_or(DEFAULT_NOISE);
    let patterns = match (&o.patterns, o.all.unwrap_or(false)) {
        (Some(_), true) => return Err(CliError::field("patterns", "cannot be combined with all")),
        (Some(text), false) => parse::patterns("patterns", text, n)?,
        (None, true) => {
            if n > MAX_LISTED_N {
                return Err(CliError::field(
                    "all",
                    format!("n = {n} exceeds {MAX_LISTED_N}"),
                ));
            }
            let mut ps: Vec<SamplingPattern> = (0..1u64 << n)
                .map(|mask| SamplingPattern::from_mask(mask, n))
                .collect();
            ps.sort_by(|a, b| (a.len(), a.indices()).cmp(&(b.len(), b.indices())));
            ps
        }
        (None, false) => return Err(CliError::field("patterns", "required unless all is set")),
    };
    let mut t = Table::new("mmse", &["pattern", "size", "mmse", "method"]);
    for p in &patterns {
        let r = mmse_for_pattern(&model, p, noise)?;
        let method = match r.method {
            MmseMethod::Woodbury => "woodbury",
            MmseMethod::PseudoInverse => "pseudo-inverse",
        };
        t.push(vec![
            parse::pattern_text(p).into(),
            p.len().into(),
            r.error.into(),
            method.into(),
        ]);
    }
    Ok(t)
}

fn average(o: &AverageOpts) -> Result<Table, CliError> {
    let (s, _) = spectrum_of(&o.spectrum, o.n, o.power)?;
    let n = s.len();
    let noise = o.noise.unwrap_or(DEFAULT_NOISE);
    let grid = parse::grid("p_grid", o.p_grid.as_deref().unwrap_or("0.1:0.9:0.1"))?;
    let models = [
        model_of(s.clone(), &o.transform)?,
        SourceModel::new(make_dft(n)?, s.clone())?,
        SourceModel::new(UnitaryTransform::identity(n)?, s)?,
    ];
    let mut t = Table::new("average", &["p", "J_U", "J_dft", "J_identity"]);
    for p in grid {
        let ch = parse::channel(&format!("bernoulli:{p}"), noise)
            .map_err(|_| CliError::field("p_grid", format!("{p} is not a probability")))?;
        let mut row = vec![Cell::from(p)];
        for m in &models {
            row.push(average_mmse_exact(m, &ch)?.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn cwss(o: &CwssOpts) -> Result<Table, CliError> {
    let (s, preset) = spectrum_of(&o.spectrum, o.n, o.power)?;
    let n = s.len();
    let noise = o.noise.unwrap_or(DEFAULT_NOISE);
    let spacings = match &o.spacings {
        Some(text) => parse::indices("spacings", text)?,
        None => (1..=n).filter(|d| n % d == 0).collect(),
    };
    let mut t = Table::new(
        "cwss",
        &[
            "delta_n",
            "m",
            "mmse",
            "noiseless_alias_bound",
            "bandpass_formula",
        ],
    );
    for d in spacings {
        if d == 0 || n % d != 0 {
            return Err(CliError::field(
                "spacings",
                format!("{d} does not divide n = {n}"),
            ));
        }
        let m = n / d;
        let formula = match preset {
            Preset::Bandpass(b) if m >= b => Some(bandpass_error(s.trace(), b, m, n, noise)?),
            _ => None,
        };
        t.push(vec![
            d.into(),
            m.into(),
            equidistant_mmse(&s, d, noise)?.into(),
            aliasing_free_bound(&s, d)?.into(),
            formula.into(),
        ]);
    }
    Ok(t)
}

pub const CONDITION_KEYS: [&str; 4] = [
    "log_squared_count",
    "failure_prob_count",
    "rho_kappa",
    "rho_limit",
];
const CONSTANT_KEYS: [&str; 7] = ["C_I", "C_kD", "C_lambda_I", "C_lambda_S", "D", "eta", "mu"];

fn bounds(o: &BoundsOpts) -> Result<Table, CliError> {
    let (s, _) = spectrum_of(&o.spectrum, o.n, o.power)?;
    let n = s.len();
    let delta = o.delta.unwrap_or(0.9);
    let d = effective_dof(&s, delta.clamp(f64::MIN_POSITIVE, 1.0));
    let params = BoundParams {
        delta,
        kappa: o.kappa.unwrap_or(0.5 * (1.0 + n as f64 / d as f64)),
        theta: o.theta.unwrap_or(0.5),
        gamma: o.gamma.unwrap_or(0.5),
        rho: o.rho.unwrap_or(0.9),
        epsilon: o.epsilon.unwrap_or(0.1),
        m: o.m.unwrap_or(n),
        n,
        noise_power: o.noise.unwrap_or(DEFAULT_NOISE),
        c1: o.c1.unwrap_or(DEFAULT_C1),
        c2: o.c2.unwrap_or(DEFAULT_C2),
    };
    let mu = o.mu.unwrap_or(1.0);
    let report = high_probability_bound(&s, &params, mu)?;
    let eig = eigmin_lower_bound(&s, &params, mu)?;

    let mut columns = vec!["bound".to_string(), "eigmin_floor".to_string()];
    for k in CONDITION_KEYS {
        columns.push(format!("{k}_ok"));
        columns.push(format!("{k}_margin"));
    }
    columns.extend(CONSTANT_KEYS.iter().map(|k| k.to_string()));
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("bounds", &names);

    let mut row = vec![Cell::from(report.bound_value), Cell::from(eig)];
    for c in &report.conditions {
        row.push(c.satisfied.into());
        row.push(c.margin.into());
    }
    for k in CONSTANT_KEYS {
        row.push(report.constants.get(k).copied().into());
    }
    t.push(row);
    Ok(t)
}

fn optimize_cmd(o: &OptimizeOpts, seed: u64) -> Result<Table, CliError> {
    let (s, _) = spectrum_of(&o.spectrum, o.n, o.power)?;
    let n = s.len();
    let ch = parse::channel(
        o.channel.as_deref().unwrap_or("bernoulli:0.5"),
        o.noise.unwrap_or(DEFAULT_NOISE),
    )?;
    let defaults = OptimizerConfig::default();
    let config = OptimizerConfig {
        max_steps: o.max_steps.unwrap_or(defaults.max_steps),
        step_init: o.step_init.unwrap_or(defaults.step_init),
        armijo_c: o.armijo_c.unwrap_or(defaults.armijo_c),
        shrink: o.shrink.unwrap_or(defaults.shrink),
        tol_residual: o.tol.unwrap_or(defaults.tol_residual),
    };
    let restarts = o.restarts.unwrap_or(1);
    if restarts == 0 {
        return Err(CliError::field("restarts", "must be positive"));
    }

    let mut outcomes = Vec::with_capacity(restarts);
    for i in 0..restarts {
        let (label, start) = match (&o.start, i) {
            (Some(text), 0) => (text.clone(), parse::transform(text, n)?),
            _ => {
                let sd = derive_seed(seed, i as u64);
                (format!("haar:{sd}"), random_unitary(n, sd)?)
            }
        };
        let initial = objective(&start, &s, &ch)?;
        let out = optimize(&s, &ch, &start, &config)?;
        let last = *out.trace.last().expect("trace holds the initial value");
        outcomes.push((label, initial, last, out));
    }
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2))
        .map(|(i, _)| i)
        .expect("at least one restart");
    if let Some(path) = &o.save_transform {
        parse::save_transform(&outcomes[best].3.transform, path)?;
    }

    let mut t = Table::new(
        "optimize",
        &[
            "restart",
            "start",
            "steps",
            "converged",
            "residual",
            "initial_objective",
            "objective",
            "best",
        ],
    );
    for (i, (label, initial, last, out)) in outcomes.into_iter().enumerate() {
        t.push(vec![
            i.into(),
            label.into(),
            out.steps.into(),
            out.converged.into(),
            out.residual.into(),
            initial.into(),
            last.into(),
            (i == best).into(),
        ]);
    }
    Ok(t)
}

fn mc(o: &McOpts, seed: u64) -> Result<Table, CliError> {
    let (s, _) = spectrum_of(&o.spectrum, o.n, o.power)?;
    let model = model_of(s, &o.transform)?;
    let n = model.n();
    let noise = o.noise.unwrap_or(DEFAULT_NOISE);
    let trials = o.trials.unwrap_or(DEFAULT_TRIALS);
    let need_m = || {
        o.m.ok_or_else(|| CliError::field("m", "required for this kind"))
    };
    let kind = o.kind.as_deref().unwrap_or("average");
    let t = match kind {
        "mse" => {
            let text = o
                .pattern
                .as_deref()
                .ok_or_else(|| CliError::field("pattern", "required for kind = mse"))?;
            let mut ps = parse::patterns("pattern", text, n)?;
            if ps.len() != 1 {
                return Err(CliError::field(
                    "pattern",
                    "exactly one pattern is expected",
                ));
            }
            let p = ps.remove(0);
            let est = empirical_mse(&model, &p, noise, trials, seed)?;
            let exact = mmse_for_pattern(&model, &p, noise)?.error;
            estimate_table(kind, trials, seed, est.mean, est.stderr, Some(exact))
        }
        "average" => {
            let ch = parse::channel(o.channel.as_deref().unwrap_or("bernoulli:0.5"), noise)?;
            let est = average_mmse_mc(&model, &ch, trials, seed)?;
            let exact = match ch.mode {
                ChannelMode::WithReplacement { .. } => None,
                _ if n > MAX_EXACT_N => None,
                _ => Some(average_mmse_exact(&model, &ch)?),
            };
            estimate_table(kind, trials, seed, est.mean, est.stderr, exact)
        }
        "tail" => {
            let m = need_m()?;
            let threshold = o
                .threshold
                .ok_or_else(|| CliError::field("threshold", "required for kind = tail"))?;
            let frac = empirical_tail(
                &model,
                m,
                noise,
                threshold,
                trials,
                seed,
                o.replacement.unwrap_or(false),
            )?;
            let mut t = Table::new(
                "mc",
                &["kind", "trials", "seed", "m", "threshold", "fraction"],
            );
            t.push(vec![
                kind.into(),
                trials.into(),
                seed.into(),
                m.into(),
                threshold.into(),
                frac.into(),
            ]);
            t
        }
        "eigmin" => {
            let m = need_m()?;
            let q = empirical_eigmin(&model, m, noise, trials, seed)?;
            let mut t = Table::new("mc", &["kind", "trials", "seed", "m", "min", "q01", "q50"]);
            t.push(vec![
                kind.into(),
                trials.into(),
                seed.into(),
                m.into(),
                q.min.into(),
                q.q01.into(),
                q.q50.into(),
            ]);
            t
        }
        other => return Err(CliError::field("kind", format!("unknown kind '{other}'"))),
    };
    Ok(t)
}

fn estimate_table(
    kind: &str,
    trials: usize,
    seed: u64,
    mean: f64,
    stderr: f64,
    exact: Option<f64>,
) -> Table {
    let mut t = Table::new("mc", &["kind", "trials", "seed", "mean", "stderr", "exact"]);
    t.push(vec![
        kind.into(),
        trials.into(),
        seed.into(),
        mean.into(),
        stderr.into(),
        exact.into(),
    ]);
    t
}

fn verify(o: &VerifyOpts, _seed: u64) -> (Table, Vec<CheckItem>) {
    let mut fixture = Fixture::default();
    if let Some(eps) = o.perturb {
        for l in &mut fixture.counterexample_lambdas {
            *l += eps;
        }
    }
    let items = run_checklist(&fixture);
    let mut t = Table::new("verify-paper", &["item", "passed", "detail"]);
    for it in &items {
        t.push(vec![
            it.name.as_str().into(),
            it.passed.into(),
            it.detail.as_str().into(),
        ]);
    }
    (t, items)
}
