use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("decode error: {0}")]
    Decode(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("non-finite value in scalar field at index {0}")]
    NonFiniteField(usize),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(u32, u32, u32, u32),
    #[error("empty structure: {0}")]
    EmptyStructure(&'static str),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("degenerate box-counting fit: only {0} scales available")]
    DegenerateFit(usize),
    #[error("zero chord length: centerline endpoints coincide")]
    ZeroChord,
    #[error("caliber radicand not positive ({0})")]
    InvalidCaliber(f64),
    #[error("vessel width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),
    #[error("degenerate contingency table: {0}")]
    DegenerateTable(&'static str),
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("feature '{0}' has no observed development-set values")]
    AllMissingFeature(String),
    #[error("fewer than {needed} neighbor rows available ({found})")]
    InsufficientNeighbors { needed: usize, found: usize },
    #[error("class '{0}' missing from data")]
    MissingClass(String),
    #[error("singular linear system (rank-deficient design with lambda = 0)")]
    SingularSystem,
    #[error("empty group: {0}")]
    EmptyGroup(String),
    #[error("phantom curve leaves the raster: {0}")]
    OutOfBounds(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
