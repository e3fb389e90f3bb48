use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("word is not a codeword: {0}")]
    Membership(String),

    #[error("codes are not nested: {0}")]
    Nesting(String),

    #[error("invalid code construction: {0}")]
    Construction(String),

    #[error("syndrome {syndrome} has no entry of weight <= {radius}")]
    DecodeFailure { syndrome: String, radius: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("backend limit exceeded: {qubits} qubits requested, limit {limit}")]
    BackendLimit { qubits: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("backend divergence: {0}")]
    Divergence(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
