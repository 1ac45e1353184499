use std::fmt;

/// Error raised by the std front end: either a core error or a problem with
/// files and their contents.
#[derive(Debug)]
pub enum AppError {
    Core(cag_core::Error),
    Parse(String),
    Io(String),
    /// Arguments that parse but do not fit together.
    Usage(String),
}

impl AppError {
    pub fn code(&self) -> &'static str {
        match self {
            AppError::Core(e) => e.code(),
            AppError::Parse(_) => "parse_error",
            AppError::Io(_) => "io_error",
            AppError::Usage(_) => "usage_error",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            AppError::Core(e) => e.message(),
            AppError::Parse(m) | AppError::Io(m) | AppError::Usage(m) => m,
        }
    }

    /// Single-line JSON error record.
    pub fn to_record(&self) -> String {
        serde_json::json!({ "error": self.code(), "message": self.message() }).to_string()
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code(), self.message())
    }
}

impl std::error::Error for AppError {}

impl From<cag_core::Error> for AppError {
    fn from(e: cag_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;
