/// Failure modes surfaced by the library. Every fallible operation returns
/// one of these; panics are reserved for violated internal invariants.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand dimensions do not chain (matmul, concat, loss inputs).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A configuration value is outside its legal domain. The message lists
    /// every offending key, not just the first.
    #[error("config error: {0}")]
    Config(String),

    /// A computed quantity left its numeric domain (non-finite gradient,
    /// beta outside (0,1), diverged loss).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A timestep or row index is outside its valid range.
    #[error("index error: {0}")]
    Index(String),

    /// Malformed input data; cites the offending row/column where known.
    #[error("parse error: {0}")]
    Parse(String),

    /// A split cannot be formed (e.g. semi-supervised without enough normals).
    #[error("split error: {0}")]
    Split(String),

    /// A metric has no defined value on the given labels.
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// Mismatched state objects (tape from a different parameter set, etc.).
    #[error("state error: {0}")]
    State(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
