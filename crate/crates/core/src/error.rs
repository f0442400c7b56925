use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input extent does not fit the dyadic grid.
    #[error("sizing error: {what} (required length {required})")]
    Sizing { what: String, required: usize },

    /// Coefficient pyramid or mask has the wrong shape.
    #[error("malformed structure: {0}")]
    Structure(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A subtree mask breaks parent closure or drops the root.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("enumeration of {count} items exceeds cap {cap}")]
    TooLarge { count: String, cap: u64 },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }
}
