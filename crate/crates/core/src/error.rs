use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems found while decoding a binary PGM stream.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("unsupported magic number {0:?}, expected \"P5\"")]
    UnsupportedMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(&'static str),
    #[error("maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("non-positive dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("truncated pixel payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    PixelCountMismatch { expected: usize, actual: usize },
    #[error("non-finite pixel value at index {0}")]
    NonFinitePixel(usize),
    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error("cannot transform an empty signal")]
    EmptySignal,
    #[error("decomposition needs at least one level")]
    ZeroLevels,
    #[error("dimensions exhausted at level {level}: {width}x{height} cannot be paired")]
    LevelsExhausted {
        level: usize,
        width: usize,
        height: usize,
    },
    #[error("band level {requested} out of range 1..={levels}")]
    LevelOutOfRange { requested: usize, levels: usize },
    #[error("inconsistent dimensions: {0}")]
    InconsistentDims(String),

    #[error("pixel value {0} outside [0, 255]")]
    ValueOutOfRange(f64),
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("sketch transform requires an offset value")]
    MissingOffset,
    #[error("offset must be finite and non-negative, got {0}")]
    InvalidOffset(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("need at least 2 training samples, got {0}")]
    TooFewSamples(usize),
    #[error("training data has no positive eigenvalue")]
    NoPositiveEigenvalue,
    #[error("negative eigenvalue {0}")]
    NegativeEigenvalue(f64),

    #[error("gallery is empty")]
    EmptyGallery,
    #[error("SVM training needs at least 2 distinct labels")]
    SingleClass,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("label {0:?} is missing from the ranked list")]
    LabelNotRanked(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    ImageFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("model file: {0}")]
    Model(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical routines rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotSymmetric(_)
                | Error::NoConvergence(_)
                | Error::NoPositiveEigenvalue
                | Error::NegativeEigenvalue(_)
        )
    }

    /// True for bad user-supplied options.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParameter(_))
    }
}
