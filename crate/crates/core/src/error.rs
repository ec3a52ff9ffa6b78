use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid decomposition: {0}")]
    Decomposition(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("skeleton vertex off interface {interface} by {offset:e} (tolerance {tolerance:e})")]
    SkeletonMismatch {
        interface: usize,
        offset: f64,
        tolerance: f64,
    },

    #[error("unsupported quadrature order {order} for {kind}")]
    UnsupportedOrder { kind: &'static str, order: usize },

    #[error("degenerate triangle (area {area:e})")]
    DegenerateTriangle { area: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    QuadratureTolerance { tolerance: f64, estimate: f64 },

    #[error("matrix is singular to working precision at pivot {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("refinement genealogy missing: {0}")]
    MissingGenealogy(String),

    #[error("estimator identity violated: theta^2 = {total:e}, theta1^2 + 2 nu theta2^2 = {split:e}")]
    EstimatorIdentity { total: f64, split: f64 },

    #[error("all indicators are zero; nothing to mark")]
    NothingToMark,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("system of size {n} needs {bytes} bytes, above the configured limit of {limit}")]
    TooLarge { n: usize, bytes: usize, limit: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
