use thiserror::Error;

/// Errors produced by the dynamics, entanglement and protocol routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested approximation is not available for these parameters.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// A fixed-step integrator was asked to use a step that is too coarse.
    #[error("resolution error: step {step:.3e} times rate {rate:.3e} exceeds {limit}")]
    Resolution { step: f64, rate: f64, limit: f64 },

    /// A discretized bath was evolved past its recurrence time.
    #[error("aliasing error: horizon {horizon:.6e} exceeds recurrence time {recurrence:.6e}")]
    Aliasing { horizon: f64, recurrence: f64 },

    /// A joint state carries weight outside the model's five-component subspace.
    #[error("structure error: amplitude {magnitude:.3e} on basis index {index:04b}")]
    Structure { index: usize, magnitude: f64 },

    /// Projective measurement onto an outcome with (numerically) zero probability.
    #[error("measurement impossible: outcome probability {probability:.3e}")]
    MeasurementImpossible { probability: f64 },

    /// A bracketing root solve found no sign change.
    #[error("solver error: {0}")]
    Solver(String),

    /// A search ran past its time horizon without meeting its criterion.
    #[error("horizon error: {0}")]
    Horizon(String),

    /// The criterion can never be met for these parameters.
    #[error("never converges: {0}")]
    NeverConverges(String),
}

pub type Result<T> = std::result::Result<T, Error>;
