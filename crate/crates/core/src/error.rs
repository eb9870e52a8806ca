use thiserror::Error;

/// Errors raised by operator construction, propagation and the optimizers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("full Hilbert space of {n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("chromosome length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unsupported operator count d = {0} (expected 3, 9 or 21)")]
    UnsupportedOperatorCount(usize),

    #[error("dimensionless time s = {0} outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("integrator failed at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("degenerate lowest gap {gap:e} at s = {s}")]
    DegenerateGap { s: f64, gap: f64 },

    #[error("population contains an unevaluated chromosome at index {0}")]
    Unevaluated(usize),

    #[error("fitness evaluation failed: {0}")]
    Fitness(String),

    #[error("empty Pareto front")]
    EmptyFront,

    #[error("approximation ratio undefined: maximum of the cost operator is {0}")]
    UndefinedRatio(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
