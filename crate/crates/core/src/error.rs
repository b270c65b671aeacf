use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit site {site} out of range 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("invariant violated at t = {t}: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("matrix exponential oracle requires a time-independent Hamiltonian")]
    NonConstantHamiltonian,

    #[error("realization {k}: {source}")]
    Realization {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepSizeUnderflow { .. } | Error::InvariantViolation { .. } => true,
            Error::Realization { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
