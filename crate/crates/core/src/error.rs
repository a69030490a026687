use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value {value} is outside the range of the transformation; admissible interval is ({lower}, {upper})")]
    Range { value: f64, lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("data generation failed at index {index}: {reason}")]
    Generation { index: usize, reason: String },

    #[error("coefficient undefined: {0}")]
    UndefinedCoefficient(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown table id `{0}`")]
    UnknownTable(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
