use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix data length {len} does not match {rows}x{cols}")]
    BadMatrixShape { rows: usize, cols: usize, len: usize },

    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("vector must have at least one component")]
    EmptyVector,

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("simplex scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("bisection bracket does not enclose the multiplier (implementation bug)")]
    BracketFailure,

    #[error("brute-force oracle supports at most {max} dimensions, got {got}")]
    OracleDimensionTooLarge { got: usize, max: usize },

    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("knn must be in 1..{points}, got {knn}")]
    KnnOutOfRange { knn: usize, points: usize },

    #[error("graph construction needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("affinity matrix is not symmetric at ({row}, {col})")]
    AsymmetricAffinity { row: usize, col: usize },

    #[error("affinity w[{row}][{col}] = {value} is negative")]
    NegativeAffinity { row: usize, col: usize, value: f64 },

    #[error("affinity diagonal entry {0} is nonzero")]
    NonzeroSelfAffinity(usize),

    #[error("assignment row {row} sums to {sum}, not 1")]
    RowOffSimplex { row: usize, sum: f64 },

    #[error("assignment entry at row {row}, column {col} is negative")]
    NegativeAssignment { row: usize, col: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(&'static str),

    #[error("invalid fit configuration: {0}")]
    InvalidFitConfig(&'static str),

    #[error("kernel argument must be nonnegative, got {0}")]
    NegativeKernelArgument(f64),

    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("query affinity vector has entry {value} at index {index}; affinities must be nonnegative and finite")]
    InvalidAffinity { index: usize, value: f64 },

    #[error("query affinities sum to zero; the query is too far from every training point")]
    ZeroAffinityMass,

    #[error("out-of-sample mapping requires a positive smoothing weight, got {0}")]
    NonPositiveSmoothing(f64),

    #[error("model schema mismatch: expected {expected:?}, found {found:?}")]
    ModelSchemaMismatch { expected: String, found: String },

    #[error("model file is inconsistent: {0}")]
    ModelInconsistent(String),

    #[error("csv input is empty")]
    CsvEmpty,

    #[error("csv parse error at row {row}, column {col}: {detail}")]
    CsvMalformed { row: usize, col: usize, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
