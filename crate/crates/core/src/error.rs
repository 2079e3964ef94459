use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Bad arguments or options; maps to a usage exit status in the CLI.
    #[error("usage: {0}")]
    Usage(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("integrality violation on residue {residue}: {detail}")]
    Integrality { residue: u64, detail: String },

    #[error("value {value} outside the domain of {map}: {reason}")]
    Domain {
        map: String,
        value: String,
        reason: String,
    },

    /// A checked mathematical statement failed; carries a printable witness.
    #[error("falsified: {claim} (witness: {witness})")]
    Falsified { claim: String, witness: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn falsified(claim: impl Into<String>, witness: impl ToString) -> Self {
        Error::Falsified {
            claim: claim.into(),
            witness: witness.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
