use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("kernel `{0}` has no exact evaluation")]
    NotExact(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("weight queried at ({a}, {b}) beyond its certified domain a*b <= {bound}")]
    OutsideWeightDomain { a: u64, b: u64, bound: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
