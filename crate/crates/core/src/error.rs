use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("invalid matrix shape {rows}x{cols}: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank deficient: column {column} has residual norm {residual:e}")]
    RankDeficient { column: usize, residual: f64 },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("value {0} lies outside [0, 1] beyond clamping tolerance")]
    ClampOutOfRange(f64),
    #[error("subspace already fills the ambient space, complement is empty")]
    FullDimension,
    #[error("line set has zero common angle (common cosine {0})")]
    AngleZero(f64),
    #[error("common angle must be positive (got {0})")]
    AlphaZero(f64),
    #[error("family has {0} members, at least 2 required")]
    FamilyTooSmall(usize),
    #[error("family is not equiangular: {0}")]
    NotEquiangular(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("integer overflow evaluating {0}")]
    Overflow(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),
    #[error("invalid packing problem: {0}")]
    InvalidProblem(String),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("unknown construction kind '{0}'")]
    UnknownKind(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("index {index} out of range for family of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported schema version '{0}'")]
    UnsupportedSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
