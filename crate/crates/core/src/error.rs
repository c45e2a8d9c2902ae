use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An outcome whose Born probability is (numerically) zero was requested.
    #[error("measurement inconsistency: outcome probability {probability:e} at site {site}")]
    MeasurementInconsistency { site: usize, probability: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("singular parameters: {0}")]
    SingularParameter(String),

    /// A perturbative prediction was requested outside its range of validity.
    #[error("outside validity range: {0}")]
    OutOfValidity(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_argument_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
