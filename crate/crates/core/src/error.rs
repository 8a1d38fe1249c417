use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol vanishes on the unit circle near theta = {theta} (|a| = {modulus:e})")]
    ZeroOnCircle { theta: f64, modulus: f64 },

    #[error("tuples do not interlace: {0}")]
    NotInterlacing(String),

    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),

    #[error("negative square {value:e} for border entry of cluster {cluster}")]
    NegativeSquare { cluster: usize, value: f64 },

    #[error("interlacing extension failed at level {level}: {source}")]
    Interlace {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("eigensolver or SVD failed at size {size}: {message}")]
    NumericalBreakdown { size: usize, message: String },

    #[error("matrix is not self-adjoint (residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },

    #[error("matrix at index {n} is not normal (residual {residual:e})")]
    NotNormal { n: usize, residual: f64 },

    #[error("point set is empty")]
    EmptySet,

    #[error("invalid interval ({lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("only {found} indices survive the refinement (need at least 3)")]
    TooFewIndices { found: usize },

    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    #[error("invalid Cuntz parameters: {0}")]
    InvalidCuntz(String),

    #[error("index {n} outside the range of sequence `{label}`")]
    OutOfRange { label: String, n: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
