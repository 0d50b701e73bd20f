use thiserror::Error;

pub type Result<T> = std::result::Result<T, ProjError>;

/// Every failure mode of the library.
///
/// Residual-carrying variants report the measured quantity that tripped the
/// check so callers can tell a near miss from a gross violation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjError {
    #[error("matrix is not self-adjoint (||S - S*|| = {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("matrix is not a projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("matrix is not idempotent (||I^2 - I|| = {residual:.3e})")]
    NotIdempotent { residual: f64 },
    #[error("matrix is not a partial isometry (||UU*U - U|| = {residual:.3e})")]
    NotPartialIsometry { residual: f64 },
    #[error("operator is numerically degenerate (smallest nonzero eigenvalue of TT* is {gap:.3e})")]
    NumericallyDegenerate { gap: f64 },
    #[error("threshold {threshold} lies within the clustering width of eigenvalue {eigenvalue}")]
    AmbiguousThreshold { threshold: f64, eigenvalue: f64 },
    #[error("eigenvalue {value} lies outside the function's domain")]
    DomainError { value: f64 },
    #[error("angle {angle} is not in the open interval (0, pi/2)")]
    InvalidAngle { angle: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("join undefined: ||PQ|| = {norm:.6} is not below 1 by the clustering margin")]
    JoinUndefined { norm: f64 },
    #[error("projections too far apart: ||P - Q|| = {norm:.6}")]
    PairTooFar { norm: f64 },
    #[error("norm too large: {norm:.6} is not below 1 by the clustering margin")]
    NormTooLarge { norm: f64 },
    #[error("U*U^2 is not self-adjoint (residual {residual:.3e})")]
    CommutatorTooLarge { residual: f64 },
    #[error("function is inadmissible: {0}")]
    Inadmissible(String),
    #[error("invalid scalar function: {0}")]
    InvalidFunction(String),
    #[error("initial and final projections are not orthogonal (||QR|| = {norm:.3e})")]
    NotOrthogonal { norm: f64 },
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("bad interval: need s > t > 0, got t = {t}, s = {s}")]
    BadInterval { t: f64, s: f64 },
    #[error("quotient spectrum point {point} lies inside the gap ({s}, {t})")]
    GapNotClean { s: f64, t: f64, point: f64 },
    #[error("split construction degenerate (bound {bound:.3e}); shrink delta")]
    DegenerateSplit { bound: f64 },
    #[error("lifting stalled after {iterations} iterations at Hausdorff distance {distance:.3e}")]
    Stalled { distance: f64, iterations: usize },
    #[error("not in the positive case: {0}")]
    NotPositiveCase(String),
    #[error("excision preconditions fail (residual {residual:.3e})")]
    NotExcising { residual: f64 },
    #[error("rank {requested} unachievable; at most {available} available")]
    RankUnachievable { requested: usize, available: usize },
    #[error("dimension too small: need {required}, have {available}")]
    DimensionTooSmall { required: usize, available: usize },
    #[error("basis is not orthonormal (residual {residual:.3e})")]
    BasisNotOrthonormal { residual: f64 },
    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("format error: {0}")]
    Format(String),
}

impl ProjError {
    /// Stable short name, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            ProjError::NotSelfAdjoint { .. } => "NotSelfAdjoint",
            ProjError::NotProjection { .. } => "NotProjection",
            ProjError::NotIdempotent { .. } => "NotIdempotent",
            ProjError::NotPartialIsometry { .. } => "NotPartialIsometry",
            ProjError::NumericallyDegenerate { .. } => "NumericallyDegenerate",
            ProjError::AmbiguousThreshold { .. } => "AmbiguousThreshold",
            ProjError::DomainError { .. } => "DomainError",
            ProjError::InvalidAngle { .. } => "InvalidAngle",
            ProjError::DimensionMismatch { .. } => "DimensionMismatch",
            ProjError::JoinUndefined { .. } => "JoinUndefined",
            ProjError::PairTooFar { .. } => "PairTooFar",
            ProjError::NormTooLarge { .. } => "NormTooLarge",
            ProjError::CommutatorTooLarge { .. } => "CommutatorTooLarge",
            ProjError::Inadmissible(_) => "Inadmissible",
            ProjError::InvalidFunction(_) => "InvalidFunction",
            ProjError::NotOrthogonal { .. } => "NotOrthogonal",
            ProjError::AlgebraMismatch(_) => "AlgebraMismatch",
            ProjError::BadInterval { .. } => "BadInterval",
            ProjError::GapNotClean { .. } => "GapNotClean",
            ProjError::DegenerateSplit { .. } => "DegenerateSplit",
            ProjError::Stalled { .. } => "Stalled",
            ProjError::NotPositiveCase(_) => "NotPositiveCase",
            ProjError::NotExcising { .. } => "NotExcising",
            ProjError::RankUnachievable { .. } => "RankUnachievable",
            ProjError::DimensionTooSmall { .. } => "DimensionTooSmall",
            ProjError::BasisNotOrthonormal { .. } => "BasisNotOrthonormal",
            ProjError::InvalidTolerance(_) => "InvalidTolerance",
            ProjError::UnknownSuite(_) => "UnknownSuite",
            ProjError::Format(_) => "Format",
        }
    }

    /// Process exit code for the CLI. Codes 0-2 are reserved for
    /// pass / check failure / usage error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjError::UnknownSuite(_) | ProjError::Format(_) => 2,
            ProjError::NotSelfAdjoint { .. } => 10,
            ProjError::NotProjection { .. } => 11,
            ProjError::NotIdempotent { .. } => 12,
            ProjError::NotPartialIsometry { .. } => 13,
            ProjError::NumericallyDegenerate { .. } => 14,
            ProjError::AmbiguousThreshold { .. } => 15,
            ProjError::DomainError { .. } => 16,
            ProjError::InvalidAngle { .. } => 17,
            ProjError::DimensionMismatch { .. } => 18,
            ProjError::JoinUndefined { .. } => 19,
            ProjError::PairTooFar { .. } => 20,
            ProjError::NormTooLarge { .. } => 21,
            ProjError::CommutatorTooLarge { .. } => 22,
            ProjError::Inadmissible(_) => 23,
            ProjError::InvalidFunction(_) => 24,
            ProjError::NotOrthogonal { .. } => 25,
            ProjError::AlgebraMismatch(_) => 26,
            ProjError::BadInterval { .. } => 27,
            ProjError::GapNotClean { .. } => 28,
            ProjError::DegenerateSplit { .. } => 29,
            ProjError::Stalled { .. } => 30,
            ProjError::NotPositiveCase(_) => 31,
            ProjError::NotExcising { .. } => 32,
            ProjError::RankUnachievable { .. } => 33,
            ProjError::DimensionTooSmall { .. } => 34,
            ProjError::BasisNotOrthonormal { .. } => 35,
            ProjError::InvalidTolerance(_) => 36,
        }
    }
}
