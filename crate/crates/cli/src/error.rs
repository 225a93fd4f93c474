use std::fmt;

use cycleguard::system_file::SystemFileError;
use cycleguard::transform::TransformError;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable input, bad JSON or expression syntax, bad flag values.
    Parse(String),
    /// Well-formed input describing an unusable system.
    InvalidSystem(String),
    /// The restoring force does not admit the Conti-Filippov map.
    Inadmissible(String),
    Internal(String),
    /// Some gallery facts were not reproduced.
    FactsNotReproduced(usize),
    /// The reader closed standard output early.
    ClosedOutput,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ClosedOutput => 0,
            CliError::FactsNotReproduced(_) => 1,
            CliError::Parse(_) => 2,
            CliError::InvalidSystem(_) => 3,
            CliError::Inadmissible(_) => 4,
            CliError::Internal(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::InvalidSystem(m) => write!(f, "invalid system: {m}"),
            CliError::Inadmissible(m) => write!(f, "inadmissible restoring force: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
            CliError::FactsNotReproduced(n) => write!(f, "{n} gallery fact(s) not reproduced"),
            CliError::ClosedOutput => write!(f, "output closed"),
        }
    }
}

impl From<SystemFileError> for CliError {
    fn from(e: SystemFileError) -> Self {
        if e.is_syntax() {
            CliError::Parse(e.to_string())
        } else {
            CliError::InvalidSystem(e.to_string())
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::GNotAdmissible(_) => CliError::Inadmissible(e.to_string()),
            TransformError::System(_) => CliError::InvalidSystem(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            CliError::ClosedOutput
        } else {
            CliError::Internal(format!("I/O: {e}"))
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if let csv::ErrorKind::Io(io) = e.kind() {
            if io.kind() == std::io::ErrorKind::BrokenPipe {
                return CliError::ClosedOutput;
            }
        }
        CliError::Internal(format!("CSV: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        match e.io_error_kind() {
            Some(std::io::ErrorKind::BrokenPipe) => CliError::ClosedOutput,
            _ => CliError::Internal(e.to_string()),
        }
    }
}
