use alloc::string::String;
use core::fmt;

/// Failure modes shared by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the range where the quantity is defined.
    Domain(String),
    /// A law or schedule failed validation.
    InvalidLaw(String),
    /// Two independently computed quantities disagree beyond round-off.
    InternalConsistency(String),
    /// The request is well defined but exceeds a configured cost cap.
    Refused(String),
}

impl Error {
    /// Stable machine-readable code for this error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain_error",
            Error::InvalidLaw(_) => "invalid_law",
            Error::InternalConsistency(_) => "internal_consistency",
            Error::Refused(_) => "refused",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Error::Domain(m) | Error::InvalidLaw(m) | Error::InternalConsistency(m) | Error::Refused(m) => m,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code(), self.message())
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}

macro_rules! invalid_law {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidLaw(alloc::format!($($arg)*))
    };
}

pub(crate) use domain;
pub(crate) use invalid_law;
