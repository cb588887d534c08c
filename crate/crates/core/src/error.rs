use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular or too ill-conditioned for a positive-definite solve")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("every arm is the zero vector")]
    EmptyArmSet,
    #[error("vector leaves the projection span (relative residual {residual:e})")]
    OutOfSpan { residual: f64 },
    #[error("arm index {index} out of range for {len} arms")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("arms {first} and {second} tie for the best expected reward")]
    TiedBestArm { first: usize, second: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("active arms do not span their space")]
    DegenerateSpan,
    #[error("every design weight fell below the pruning threshold")]
    AllPruned,
    #[error("vertex {vertex} is not dominated")]
    NotDominating { vertex: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("budget {budget} too small: need at least {needed} pulls per agent")]
    InsufficientBudget { budget: usize, needed: usize },
    #[error("random instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Variant name, stable for scripting (printed on stderr by the CLI).
    pub fn name(&self) -> &'static str {
        match self {
            Error::SingularMatrix => "SingularMatrix",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyArmSet => "EmptyArmSet",
            Error::OutOfSpan { .. } => "OutOfSpan",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::TiedBestArm { .. } => "TiedBestArm",
            Error::InvalidInstance(_) => "InvalidInstance",
            Error::DegenerateSpan => "DegenerateSpan",
            Error::AllPruned => "AllPruned",
            Error::NotDominating { .. } => "NotDominating",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::InsufficientBudget { .. } => "InsufficientBudget",
            Error::GenerationFailed { .. } => "GenerationFailed",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Trial { source, .. } => source.name(),
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// True for malformed user input (files, configs) rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::InvalidConfig(_)
            | Error::InvalidGraph(_) => true,
            Error::Trial { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
