use thiserror::Error;

use crate::network::Time;

#[derive(Debug, Error)]
pub enum Error {
    /// An entity references something that does not exist or is malformed.
    #[error("structural error in {entity}: {message}")]
    Structural { entity: String, message: String },

    /// A travel time was requested outside the declared planning horizon.
    #[error("departure time {depart} on link {link} lies outside the horizon [0, {horizon_end}]")]
    Horizon {
        link: String,
        depart: Time,
        horizon_end: Time,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The instance document could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// One or more semantic invariants failed; every violation is listed.
    #[error("instance failed validation:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("problem is too large for the exhaustive oracle: {0}")]
    OracleScope(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn structural(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Structural {
            entity: entity.into(),
            message: message.into(),
        }
    }
}
