use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("index {index} out of range (len {len})")]
    Bounds { index: usize, len: usize },

    #[error("size error: {0}")]
    Size(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("refusing exact construction for n={n} (cap {cap}); use --force to override")]
    SizeGuard { n: usize, cap: usize },

    #[error("input inconsistency: {0}")]
    Inconsistent(String),

    #[error("frontier exhausted: rescue produced no candidates while {remaining} nodes remain")]
    FrontierExhausted { remaining: usize },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the CLI: 2 parameter, 3 size guard,
    /// 4 input inconsistency, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Dimension(_) | Error::Size(_) | Error::EmptyInput(_) => 2,
            Error::SizeGuard { .. } => 3,
            Error::Inconsistent(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
