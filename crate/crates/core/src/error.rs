use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subset is empty")]
    EmptySubset,
    #[error("element {element} is outside the ground set of size {n}")]
    OutOfRange { element: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("sampled measurement branch has squared norm {0:e}")]
    DegenerateBranch(f64),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("invalid walk state j={j}, l={l} for k={k}")]
    InvalidState { k: usize, j: usize, l: usize },
    #[error("parameters n={n}, k={k} are outside the complement regime 3m ln(em) <= n")]
    RegimeViolation { n: usize, k: usize },
    #[error("delta={0} is outside (0, 1/40]")]
    DeltaOutOfRange(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sequence lengths differ: {0} indices vs {1} pads")]
    LengthMismatch(usize, usize),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("block norm is zero for the requested signature")]
    ZeroBlock,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(String),
}
