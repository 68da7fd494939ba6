use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
            ErrorKind::Io => 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient history: series has {len} samples but the embedding needs at least {needed}")]
    InsufficientHistory { len: usize, needed: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unnormalized input: value {value} at row {row}, column {col} lies outside [-1, 1]")]
    Unnormalized { row: usize, col: usize, value: f64 },

    #[error("degenerate coupler: monomial map rank {rank} < {required} after {attempts} attempt(s)")]
    DegenerateCoupler {
        rank: usize,
        required: usize,
        attempts: usize,
    },

    #[error("expansion not exact: the monomial map requires the ideal-linear modulator regime")]
    ExpansionNotExact,

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("single class: labels must contain both 0 and 1")]
    SingleClass,

    #[error("empty class: {0}")]
    EmptyClass(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}: {reason}")]
    Image { path: PathBuf, reason: String },

    #[error("parse error in {what}: {reason}")]
    Parse { what: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            Error::DegenerateCoupler { .. }
            | Error::NonFinite(_)
            | Error::Numeric(_)
            | Error::ZeroVariance(_)
            | Error::Divergence(_) => ErrorKind::Numeric,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Attaches a pipeline stage name to an error.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
