use thiserror::Error;

/// Errors raised by the geometric pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("points coincide; no bisector exists")]
    CoincidentPoints,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("net construction did not reach probe maximality: {uncovered} probes uncovered (max gap {max_gap:.6})")]
    CoverageGap { uncovered: usize, max_gap: f64 },
    #[error("cell {cell} is unstable under orbit-depth doubling")]
    UnstableCell { cell: usize },
    #[error("non-transverse contact in cell {cell}: {detail}")]
    Tangency { cell: usize, detail: String },
    #[error("genericity could not be achieved after {retries} retries: {detail}")]
    Genericity { retries: usize, detail: String },
    #[error("segment misses the cone")]
    SegmentMissesCone,
    #[error("cut complex face is not a disk: {0}")]
    NonDiskFace(String),
    #[error("shared face triangulation mismatch between cells {a} and {b}")]
    SharedFaceMismatch { a: usize, b: usize },
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("stage {stage} failed (seed {seed}): {source}")]
    Stage { stage: String, seed: u64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
