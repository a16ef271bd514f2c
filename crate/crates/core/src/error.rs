use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("duplicate variable `{0}` in scope")]
    DuplicateVariable(String),

    #[error("scopes overlap on variable `{0}`")]
    OverlappingScopes(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("scope mismatch: expected [{expected}], found [{found}]")]
    ScopeMismatch { expected: String, found: String },

    #[error("table has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("row {row} of the table for `{child}` sums to {sum}")]
    RowSum { child: String, row: usize, sum: f64 },

    #[error("observation has zero probability under the current belief")]
    ZeroNormalizer,

    #[error("impossible evidence at step {step}")]
    ImpossibleEvidence { step: usize },

    #[error("KL divergence undefined: q is zero where p = {p} (cell {index})")]
    AbsoluteContinuity { index: usize, p: f64 },

    #[error("model syntax error: {0}")]
    ModelSyntax(#[from] serde_json::Error),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("{groups} parent groups exceed the supported maximum of {max}")]
    UnsupportedArity { groups: usize, max: usize },

    #[error("{method} does not apply: {reason}")]
    UnsupportedShape { method: &'static str, reason: String },

    #[error("enumeration guard exceeded: {0}")]
    EnumerationGuard(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal solver error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
