use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("torus volume {m}^{d} overflows the exact integer range")]
    VolumeOverflow { m: usize, d: usize },

    #[error("{what}: n = {n} exceeds the cap of {cap} sites")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("{what} = {value} is out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: String,
    },

    #[error("site {0} is already discovered")]
    AlreadyDiscovered(usize),

    #[error("site coordinates {coords:?} do not match dimension {d}")]
    DimensionMismatch { coords: Vec<i64>, d: usize },

    #[error("method {method} does not apply: {reason}")]
    MethodNotApplicable { method: &'static str, reason: String },

    #[error("series did not converge within {0} terms")]
    SeriesBudget(usize),

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
