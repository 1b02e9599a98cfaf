//! Command-line flags and JSON experiment files.
//!
//! A config file is a JSON object with a `"command"` key naming the
//! subcommand. Its other keys use the flag names with `_` in place of `-`.
//! A flag given on the command line overrides the same key in the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;
use crate::table::Format;

pub const THREADS_ENV: &str = "ERASURE_MMSE_THREADS";

macro_rules! options {
    ($(#[$sm:meta])* $name:ident { $($(#[$m:meta])* $field:ident : $ty:ty,)* }) => {
        $(#[$sm])*
        #[derive(Args, Deserialize, Debug, Clone, Default, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$m])*
                #[arg(long)]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            /// Fields set here win over those in `file`.
            pub fn or(self, file: Self) -> Self {
                $name { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

options!(MmseOpts {
    /// Signal length; implied by an explicit spectrum.
    n: usize,
    /// flat | bandpass:B | geometric:R | comma-separated eigenvalues.
    spectrum: String,
    /// Total power for spectrum presets.
    power: f64,
    /// dft | identity | haar:SEED | counterexample | file:PATH.
    transform: String,
    /// Noise variance per observed sample.
    noise: f64,
    /// Patterns separated by ';', indices by ','; '-' is the empty pattern.
    patterns: String,
    /// Enumerate every subset instead of --patterns.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    all: bool,
});

options!(AverageOpts {
    n: usize,
    spectrum: String,
    power: f64,
    transform: String,
    noise: f64,
    /// Erasure probabilities: start:stop:step or a comma-separated list.
    p_grid: String,
});

options!(CwssOpts {
    n: usize,
    spectrum: String,
    power: f64,
    noise: f64,
    /// Sample spacings; every divisor of N when omitted.
    spacings: String,
});

options!(BoundsOpts {
    n: usize,
    spectrum: String,
    power: f64,
    noise: f64,
    /// Number of samples drawn with replacement.
    m: usize,
    delta: f64,
    kappa: f64,
    theta: f64,
    gamma: f64,
    rho: f64,
    epsilon: f64,
    mu: f64,
    c1: f64,
    c2: f64,
});

options!(OptimizeOpts {
    n: usize,
    spectrum: String,
    power: f64,
    /// scalar | bernoulli:P | uniform:M.
    channel: String,
    noise: f64,
    /// Starting transform for the first restart; later restarts start from Haar draws.
    start: String,
    restarts: usize,
    max_steps: usize,
    step_init: f64,
    armijo_c: f64,
    shrink: f64,
    tol: f64,
    /// Write the best transform found as JSON.
    save_transform: PathBuf,
});

options!(McOpts {
    n: usize,
    spectrum: String,
    power: f64,
    transform: String,
    /// mse | average | tail | eigmin.
    kind: String,
    channel: String,
    noise: f64,
    /// Sampling pattern for kind = mse.
    pattern: String,
    trials: usize,
    /// Sample count for kind = tail and kind = eigmin.
    m: usize,
    /// Error level whose exceedance frequency kind = tail reports.
    threshold: f64,
    /// Draw with replacement for kind = tail.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    replacement: bool,
});

options!(VerifyOpts {
    /// Added to every eigenvalue of the three-point fixture.
    #[arg(hide = true)]
    perturb: f64,
});

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// MMSE of individual sampling patterns.
    Mmse(MmseOpts),
    /// Average MMSE over Bernoulli erasures for U, the DFT and the identity.
    Average(AverageOpts),
    /// Equidistant sampling of a circulant source.
    Cwss(CwssOpts),
    /// High-probability bound, its constants and its sample-count conditions.
    Bounds(BoundsOpts),
    /// Gradient search for a precoder.
    Optimize(OptimizeOpts),
    /// Monte Carlo estimates.
    Mc(McOpts),
    /// Run the reproduction checklist.
    VerifyPaper(VerifyOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mmse(_) => "mmse",
            Command::Average(_) => "average",
            Command::Cwss(_) => "cwss",
            Command::Bounds(_) => "bounds",
            Command::Optimize(_) => "optimize",
            Command::Mc(_) => "mc",
            Command::VerifyPaper(_) => "verify-paper",
        }
    }

    fn blank(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "mmse" => Command::Mmse(Default::default()),
            "average" => Command::Average(Default::default()),
            "cwss" => Command::Cwss(Default::default()),
            "bounds" => Command::Bounds(Default::default()),
            "optimize" => Command::Optimize(Default::default()),
            "mc" => Command::Mc(Default::default()),
            "verify-paper" => Command::VerifyPaper(Default::default()),
            other => {
                return Err(CliError::field(
                    "command",
                    format!("unknown command '{other}'"),
                ))
            }
        })
    }

    fn merge(self, file: Map<String, Value>) -> Result<Self, CliError> {
        fn load<T: for<'de> Deserialize<'de>>(m: Map<String, Value>) -> Result<T, CliError> {
            serde_json::from_value(Value::Object(m))
                .map_err(|e| CliError::Config(format!("config file: {e}")))
        }
        Ok(match self {
            Command::Mmse(o) => Command::Mmse(o.or(load(file)?)),
            Command::Average(o) => Command::Average(o.or(load(file)?)),
            Command::Cwss(o) => Command::Cwss(o.or(load(file)?)),
            Command::Bounds(o) => Command::Bounds(o.or(load(file)?)),
            Command::Optimize(o) => Command::Optimize(o.or(load(file)?)),
            Command::Mc(o) => Command::Mc(o.or(load(file)?)),
            Command::VerifyPaper(o) => Command::VerifyPaper(o.or(load(file)?)),
        })
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "erasure-mmse",
    version,
    about = "MMSE experiments for unitary precoding over erasure channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON experiment file with a "command" key.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; falls back to ERASURE_MMSE_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileGlobals {
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub command: Command,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Config(format!(
            "{}: expected a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

fn threads_from_env(value: Option<String>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::field(THREADS_ENV, format!("cannot parse '{v}'"))),
    }
}

impl Cli {
    pub fn resolve(self, env_threads: Option<String>) -> Result<Run, CliError> {
        let mut file = match &self.config {
            Some(p) => read_config(p)?,
            None => Map::new(),
        };
        let file_command = match file.remove("command") {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => return Err(CliError::field("command", "must be a string")),
        };
        let mut global_part = Map::new();
        for key in ["seed", "out", "format", "threads"] {
            if let Some(v) = file.remove(key) {
                global_part.insert(key.into(), v);
            }
        }
        let globals: FileGlobals = serde_json::from_value(Value::Object(global_part))
            .map_err(|e| CliError::Config(format!("config file: {e}")))?;

        let command = match (self.command, file_command) {
            (Some(c), Some(f)) if c.name() != f => {
                return Err(CliError::field(
                    "command",
                    format!("config file is for '{f}' but '{}' was requested", c.name()),
                ))
            }
            (Some(c), _) => c,
            (None, Some(f)) => Command::blank(&f)?,
            (None, None) => return Err(CliError::Config("no subcommand given".into())),
        };
        let threads = match self.threads.or(globals.threads) {
            Some(t) => Some(t),
            None => threads_from_env(env_threads)?,
        };
        if threads == Some(0) {
            return Err(CliError::field("threads", "must be positive"));
        }
        Ok(Run {
            command: command.merge(file)?,
            seed: self.seed.or(globals.seed).unwrap_or(0),
            out: self.out.or(globals.out),
            format: self.format.or(globals.format).unwrap_or_default(),
            threads,
        })
    }
}
