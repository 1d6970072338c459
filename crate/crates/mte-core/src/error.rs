use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bit stream did not begin with a valid codeword.
    #[error("decode error at bit offset {offset}: {msg}")]
    Decode { offset: usize, msg: String },

    /// Textual input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A least-squares fit had too little data or a degenerate window.
    #[error("fit error: {0}")]
    Fit(String),

    /// A sampler exhausted its step or attempt budget.
    #[error("aborted after {count} {what}")]
    Aborted { what: &'static str, count: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
