use alloc::string::String;
use core::fmt;

/// Failure modes shared by every kernel in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    EmptyDimension,
    NotHermitian { deviation: f64 },
    NotProjector { deviation: f64 },
    NotDensity { reason: &'static str, value: f64 },
    NotNormalized { norm2: f64 },
    NegativeVariance { variance: f64 },
    NegativeEigenvalue { eigenvalue: f64 },
    ZeroProbability { probability: f64 },
    InvalidParameter { name: &'static str, reason: &'static str },
    UnknownBasis(String),
    IndexOutOfRange { index: String, noise_dim: usize },
    NotItoElement { row: usize, col: usize },
    GeneratorMismatch { deviation: f64 },
    StabilityGuard { product: f64, limit: f64 },
    JumpRateTooLarge { probability: f64, limit: f64 },
    Annihilated { norm: f64, time: f64 },
    PositivityViolated { min_eigenvalue: f64, time: f64 },
    GridTooCoarse { dispersion: f64, cell: f64 },
    EmptyEnsemble,
    GridMismatch,
    TimeNotOnGrid { time: f64 },
    StatesNotRecorded,
    IncompleteInstrument { deviation: f64 },
    NotBlockSupported { amplitude: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyDimension => f.write_str("dimension must be positive"),
            Error::NotHermitian { deviation } => {
                write!(f, "operator is not Hermitian (max |A - A^dag| = {deviation:e})")
            }
            Error::NotProjector { deviation } => {
                write!(f, "operator is not an orthoprojector (deviation {deviation:e})")
            }
            Error::NotDensity { reason, value } => {
                write!(f, "not a density operator: {reason} ({value:e})")
            }
            Error::NotNormalized { norm2 } => write!(f, "state is not normalized (norm^2 = {norm2})"),
            Error::NegativeVariance { variance } => {
                write!(f, "negative variance {variance:e}: inconsistent inputs")
            }
            Error::NegativeEigenvalue { eigenvalue } => {
                write!(f, "negative eigenvalue {eigenvalue:e}")
            }
            Error::ZeroProbability { probability } => {
                write!(f, "conditioning on an outcome of probability {probability:e}")
            }
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::UnknownBasis(name) => write!(f, "unknown Ito basis element `{name}`"),
            Error::IndexOutOfRange { index, noise_dim } => {
                write!(f, "Minkowski index {index} out of range for noise dimension {noise_dim}")
            }
            Error::NotItoElement { row, col } => {
                write!(f, "matrix has a forbidden nonzero entry at ({row}, {col})")
            }
            Error::GeneratorMismatch { deviation } => {
                write!(f, "K + K^dag differs from L^dag L by {deviation:e}")
            }
            Error::StabilityGuard { product, limit } => {
                write!(f, "dt * |K| = {product} exceeds the stability limit {limit}")
            }
            Error::JumpRateTooLarge { probability, limit } => {
                write!(f, "per-step jump probability {probability} exceeds {limit}; reduce dt")
            }
            Error::Annihilated { norm, time } => {
                write!(f, "collapse operator annihilates the state at t = {time} (|C psi| = {norm:e})")
            }
            Error::PositivityViolated { min_eigenvalue, time } => {
                write!(f, "density lost positivity at t = {time} (min eigenvalue {min_eigenvalue:e}); reduce dt")
            }
            Error::GridTooCoarse { dispersion, cell } => {
                write!(f, "packet dispersion {dispersion} is below two grid cells (dx = {cell})")
            }
            Error::EmptyEnsemble => f.write_str("ensemble is empty"),
            Error::GridMismatch => f.write_str("trajectory records do not share a time grid"),
            Error::TimeNotOnGrid { time } => write!(f, "time {time} is not on the record grid"),
            Error::StatesNotRecorded => f.write_str("trajectory record carries no state snapshots"),
            Error::IncompleteInstrument { deviation } => {
                write!(f, "instrument is not normalized (max |sum V^dag V mu - I| = {deviation:e})")
            }
            Error::NotBlockSupported { amplitude } => {
                write!(f, "state has off-diagonal amplitude {amplitude:e}; not of cat-interaction form")
            }
        }
    }
}

impl core::error::Error for Error {}
