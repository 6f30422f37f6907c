use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tuple {0:?} repeats a coordinate")]
    DiagonalEntry(Vec<u32>),
    #[error("tuple {tuple:?} has length {} but the kernel has order {order}", tuple.len())]
    OrderMismatch { order: usize, tuple: Vec<u32> },
    #[error("coordinates must be >= 1, got {0:?}")]
    ZeroCoordinate(Vec<u32>),
    #[error("symmetry class {0:?} given two different values")]
    ConflictingValues(Vec<u32>),
    #[error("contraction indices out of range: r={r}, l={l}, orders {n} and {m}")]
    ContractionOutOfRange { n: usize, m: usize, r: usize, l: usize },
    #[error("kernel support reaches coordinate {needed} but the point has dimension {dimension}")]
    DimensionTooSmall { needed: usize, dimension: usize },
    #[error("truth table has {len} entries, expected 2^{d}")]
    BadTableLength { len: usize, d: usize },
    #[error("dimension {d} exceeds the configured limit {limit}")]
    DimensionLimit { d: usize, limit: usize },
    #[error("index {index} outside 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("operation requires a centered variable (mean = {0})")]
    NotCentered(f64),
    #[error("test function lacks the sup-norm of {0}")]
    MissingNorm(&'static str),
    #[error("infinite weight sequence supplied without a tail certificate")]
    MissingTailCertificate,
    #[error("input not normalized: {what} = {value}, expected 1")]
    NotNormalized { what: &'static str, value: f64 },
    #[error("variance is not positive ({0})")]
    DegenerateVariance(f64),
    #[error("index set is empty")]
    EmptySet,
    #[error("weighted measure of the index set is zero")]
    ZeroMeasure,
    #[error("precondition fails: {0}")]
    Inapplicable(String),
    #[error("Gauss quadrature rules disagree by {0:e}")]
    QuadratureUnstable(f64),
    #[error("N = {n} is below d^m = {min}")]
    NTooSmall { n: usize, min: usize },
    #[error("index map is not injective into [N]: {0}")]
    NotInjective(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
