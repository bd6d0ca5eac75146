use thiserror::Error;

/// Errors produced anywhere in the model, solver, simulator and sweep layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("no stationary state: drift matrix is not Hurwitz (stability margin {margin:e} rad/s)")]
    NoStationaryState { margin: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("covariance matrix is not physical: {0}")]
    NonPhysical(String),

    #[error(
        "reconstructed covariance is non-physical (smallest symplectic eigenvalue {min_symplectic}); check the readout gain calibration"
    )]
    Calibration { min_symplectic: f64 },

    #[error("trajectory {trajectory} diverged at step {step} (state norm {norm:e})")]
    Diverged {
        trajectory: usize,
        step: usize,
        norm: f64,
    },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
