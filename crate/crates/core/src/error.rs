use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite integrand")]
    NonFiniteIntegrand,
    #[error("sampler support mismatch")]
    SamplerSupportMismatch,
    #[error("unsupported boundary kind: {0}")]
    UnsupportedBoundary(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("point outside declared neighborhood")]
    OutsideNeighborhood,
    #[error("derivative order {0} not supported (maximum 3)")]
    DerivativeOrder(usize),
    #[error("no critical point found")]
    NoCriticalPoint,
    #[error("critical point violates r0 > 0")]
    NonPositiveRadius,
    #[error("degenerate critical point: degree undefined by sign rule")]
    DegenerateCriticalPoint,
    #[error("matrix undefined: ΔV vanishes")]
    LaplacianVanishes,
    #[error("normal orthogonal to center")]
    NormalOrthogonalToCenter,
    #[error("no critical scale")]
    NoCriticalScale,
    #[error("escaped search box")]
    EscapedSearchBox,
    #[error("missing gradient")]
    MissingGradient,
    #[error("negative base for fractional power")]
    NegativeBase,
    #[error("energy integrals require N >= 5 (got {0})")]
    DimensionTooSmall(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("potential symmetry does not match the requested matrix variant")]
    SymmetryMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
