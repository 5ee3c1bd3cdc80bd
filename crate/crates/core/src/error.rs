use thiserror::Error;

use crate::expr::{EvalError, ParseError, Point};

/// Failures reported by engine operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("form syntax: {0}")]
    FormSyntax(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular evaluation at {point}: {source}")]
    Singular { point: Point, source: EvalError },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("precondition failed: {reason}")]
    Precondition {
        reason: String,
        witness: Option<Point>,
    },

    #[error("degenerate {what}")]
    Degenerate {
        what: String,
        witness: Option<Point>,
    },

    #[error("no polynomial antiderivative for {0}")]
    NonPolynomial(String),

    #[error("convention calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    pub fn precondition(reason: impl Into<String>, witness: Option<Point>) -> Self {
        Error::Precondition {
            reason: reason.into(),
            witness,
        }
    }

    pub fn degenerate(what: impl Into<String>, witness: Option<Point>) -> Self {
        Error::Degenerate {
            what: what.into(),
            witness,
        }
    }

    pub fn witness(&self) -> Option<Point> {
        match self {
            Error::Singular { point, .. } => Some(*point),
            Error::Precondition { witness, .. } | Error::Degenerate { witness, .. } => *witness,
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
