use thiserror::Error;

/// Failures of a command, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    /// Carries a numerical failure from the core; its message names the kind.
    #[error("{0}")]
    Solver(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<cavent::Error> for CliError {
    fn from(e: cavent::Error) -> Self {
        use cavent::Error as E;
        match e {
            E::Domain(_) | E::UnsupportedRegime(_) | E::Resolution { .. } | E::Aliasing { .. } => {
                CliError::Config(e.to_string())
            }
            E::Solver(_)
            | E::Horizon(_)
            | E::NeverConverges(_)
            | E::Structure { .. }
            | E::MeasurementImpossible { .. } => CliError::Solver(e.to_string()),
        }
    }
}
