/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("jet order overflow: requested order {requested}, cap {cap}")]
    OrderOverflow { requested: usize, cap: usize },

    #[error("singular metric: {0}")]
    SingularMetric(String),

    #[error("dimension {n} too small for `{id}` (minimum {min})")]
    DimensionTooSmall { id: String, n: usize, min: usize },

    #[error("dimension out of range: {0}")]
    DimensionOutOfRange(String),

    #[error("unsupported id `{id}`: {why}")]
    UnsupportedId { id: String, why: String },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("fit inconsistency: {0}")]
    FitInconsistency(String),

    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    #[error("field is not divergence-free: {0}")]
    NotDivergenceFree(String),

    #[error("invariant `{0}` is not constant on this chart (std dev {1:.3e})")]
    NonconstantInvariant(String, f64),

    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
