use thiserror::Error;

/// Errors raised by grid construction, the elliptic solvers and time stepping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid parameter `{param}`: {reason}")]
    InvalidGrid { param: &'static str, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no harmonic fields on simply-connected domain")]
    NoHarmonicFields,

    #[error("boundary component {index} out of range (available: {available})")]
    ComponentOutOfRange { index: i32, available: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("circulation vector has length {got}, grid has {expected} inner boundary components")]
    GammaLength { expected: usize, got: usize },

    #[error("CFL violation: back-trajectory left the domain (max displacement {max_displacement:.3e})")]
    CflViolation { max_displacement: f64 },

    #[error("at t = {time:.6}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("need at least {needed} runs, got {got}")]
    TooFewRuns { needed: usize, got: usize },

    #[error("diagnostic sink failed: {0}")]
    Sink(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
