use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step-{0} groups are not supported (maximum step is 3)")]
    UnsupportedStep(usize),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("Jacobi identity fails for indices ({i}, {j}, {l}) in component {k} (residual {residual:e})")]
    JacobiViolation {
        i: usize,
        j: usize,
        l: usize,
        k: usize,
        residual: f64,
    },

    #[error("dilation parameter must be positive and finite, got {0}")]
    InvalidDilation(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: axis {axis} has {points} points, at least {min} are required")]
    GridTooCoarse { axis: usize, points: usize, min: usize },

    #[error("grid functions live on different grids")]
    SpecMismatch,

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("exponent must satisfy 1 <= p <= inf, got {0}")]
    InvalidExponent(f64),

    #[error("sub-Laplacian assembly is not symmetric (relative deviation {0:e})")]
    AsymmetricAssembly(f64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("dilation base must be finite and exceed 1, got {0}")]
    InvalidBase(f64),

    #[error("kernel is under-resolved: {0}")]
    UnderResolved(String),

    #[error("spectral supports overlap: {0}")]
    SupportOverlap(String),

    #[error("operation requires an abelian group")]
    NotAbelian,

    #[error("degenerate wavelet: {0}")]
    DegenerateWavelet(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("eigen cache: {0}")]
    Cache(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the inputs (configuration, structure files, parameters) rather
    /// than by a numerical experiment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::UnsupportedStep(_)
                | Error::InvalidStructure(_)
                | Error::JacobiViolation { .. }
                | Error::InvalidDilation(_)
                | Error::InvalidGrid(_)
                | Error::GridTooCoarse { .. }
                | Error::InvalidExponent(_)
                | Error::DegenerateProfile(_)
                | Error::InvalidBase(_)
                | Error::NotAbelian
                | Error::DegenerateWavelet(_)
                | Error::Config(_)
                | Error::Format(_)
                | Error::Json(_)
        )
    }
}
