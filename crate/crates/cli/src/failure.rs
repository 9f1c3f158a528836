//! Exit codes and the error carried up to `main`.

use std::fmt;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;
/// Output files could not be written.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(context: &str, err: impl fmt::Display) -> Self {
        Self { code: EXIT_IO, message: format!("{context}: {err}") }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<qipfot::Error> for Failure {
    fn from(e: qipfot::Error) -> Self {
        let code = match e {
            qipfot::Error::DegenerateData(_) => EXIT_DEGENERATE,
            qipfot::Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
