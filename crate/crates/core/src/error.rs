use thiserror::Error;

/// Errors raised by the numeric and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The monotone function never exceeds the target inside the search bracket.
    #[error("bracket [{lo}, {hi}] does not contain a crossing of level {level}")]
    Bracket { lo: f64, hi: f64, level: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    /// No positive Cramér exponent exists on the searchable range.
    #[error("no root: {0}")]
    NoRoot(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A single regeneration cycle ran past the event cap.
    #[error("cycle exceeded {limit} events (is the model near-critical?)")]
    CycleOverflow { limit: u64 },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
