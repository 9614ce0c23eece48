use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate rectangle: {0}")]
    DegenerateRect(String),

    #[error("non-axis-aligned input: {0}")]
    NonAxisAligned(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("containment violated: {0}")]
    Containment(String),

    #[error("partition invalid: {0}")]
    Partition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A phase (band) has zero area; the caller should drop it.
    #[error("empty phase at index {index}")]
    EmptyPhase { index: usize },

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("constants are not ordered: {0}")]
    Unordered(String),

    #[error("image is constant; cannot initialise {n} clusters")]
    ConstantImage { n: usize },

    #[error("requested {requested} clusters but image has only {distinct} distinct values")]
    TooFewDistinctValues { requested: usize, distinct: usize },

    #[error("brute force limit exceeded: {0}")]
    BruteForceCap(String),

    #[error("distance condition violated for component {component} (margin {margin})")]
    DistanceCondition { component: usize, margin: f64 },

    #[error("lambda condition violated: lambda {lambda} < required {required}")]
    LambdaCondition { lambda: f64, required: f64 },

    #[error("unsupported grid for this solver: {0}")]
    UnsupportedGrid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported file format: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
