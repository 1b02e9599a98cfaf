use std::fmt;

/// Failures that end a run, each with its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
    Reproduction(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Reproduction(_) => 4,
        }
    }

    pub fn field(name: &str, msg: impl fmt::Display) -> Self {
        CliError::Config(format!("{name}: {msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Reproduction(m) => write!(f, "reproduction failure: {m}"),
        }
    }
}

impl From<erasure_mmse::Error> for CliError {
    fn from(e: erasure_mmse::Error) -> Self {
        use erasure_mmse::Error as E;
        match e {
            E::NumericalFailure(m) => CliError::Numerical(m),
            E::ReproductionFailure(m) => CliError::Reproduction(m),
            other => CliError::Config(other.to_string()),
        }
    }
}
