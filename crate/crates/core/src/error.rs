use crate::linalg::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch ({detail})")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{op}: problem size {size} exceeds the dense limit {limit}")]
    SizeGuard {
        op: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("matrix polynomial is singular at an eigenvalue of the operator")]
    InvalidPolynomialOnSpectrum,

    #[error("shifted system with pole {pole} is singular")]
    PoleOnSpectrum { pole: C64 },

    #[error("rational function evaluated at one of its poles ({point})")]
    PoleEvaluation { point: C64 },

    #[error("block characteristic polynomial is ill-conditioned at block {block}")]
    IllConditionedCharPoly { block: usize },

    #[error("starting block vector is rank deficient")]
    RankDeficientStart,

    #[error("breakdown while extending the basis to order {order}")]
    LuckyBreakdown { order: usize },

    #[error("pole reordering precondition violated: {0}")]
    ReorderPrecondition(String),

    #[error("operation requires the last pole to be infinite")]
    NeedsInfinityPole,

    #[error("invalid block rational Arnoldi decomposition: {0}")]
    InvalidBrad(String),

    #[error("projected Sylvester equation is singular (spectra overlap)")]
    ProjectedSpectraOverlap,

    #[error("Sylvester equation is singular (spectra overlap)")]
    SpectraOverlap,

    #[error("field of values estimation failed: {0}")]
    FovEstimationFailed(String),

    #[error("invalid pole selection context: {0}")]
    InvalidContext(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }
}
