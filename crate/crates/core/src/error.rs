use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("bad prime: {0}")]
    BadPrime(String),
    #[error("domain or arity mismatch: {0}")]
    DomainMismatch(String),
    #[error("index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("element is not central: {0}")]
    NotCentral(String),
    #[error("connection is not flat: {0}")]
    NotFlat(String),
    #[error("operator is not monic: {0}")]
    NotMonic(String),
    #[error("annihilator did not stabilize: {0}")]
    NonStable(String),
    #[error("no sample point separates the components: {0}")]
    SampleDegenerate(String),
    #[error("entry cannot be expressed over the declared localization: {0}")]
    DenominatorEscape(String),
    #[error("no smooth rational sample point found: {0}")]
    NoSmoothSample(String),
    #[error("Weyl relation violated: {0}")]
    RelationViolated(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}
