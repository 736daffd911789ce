use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// An argument fell outside the documented domain of an operation.
    Domain(String),
    /// An iterative scheme ran out of iterations before reaching tolerance.
    Convergence(String),
    /// Inconsistent sizes, incompatible options, or a divisibility violation.
    Config(String),
    /// An overcompleteness scan walked past its cap without reaching the target.
    ScanCap { o_cap: f64 },
    /// Underlying I/O failure while reading or writing a dictionary file.
    Io(std::io::Error),
    /// A dictionary file did not match the expected layout.
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(s) => write!(f, "domain error: {s}"),
            Error::Convergence(s) => write!(f, "did not converge: {s}"),
            Error::Config(s) => write!(f, "invalid configuration: {s}"),
            Error::ScanCap { o_cap } => {
                write!(f, "scan exceeded the overcompleteness cap {o_cap} without reaching the target")
            }
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Format(s) => write!(f, "bad dictionary file: {s}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
