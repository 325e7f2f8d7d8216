//! Process exit codes and the error type that carries them.

use std::fmt;

pub const OK: u8 = 0;
/// Some inputs could not be read; the rest were processed.
pub const PARTIAL: u8 = 2;
/// `simulate` raised at least one alarm.
pub const ALARM: u8 = 3;
pub const USAGE: u8 = 64;
pub const DATA: u8 = 65;
pub const NO_INPUT: u8 = 66;
pub const SOFTWARE: u8 = 70;
pub const CANT_CREATE: u8 = 73;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type Outcome = Result<u8, Failure>;

/// Attaches an exit code to any error.
pub trait WithCode<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> WithCode<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

pub fn fail(code: u8, message: impl fmt::Display) -> Failure {
    Failure { code, error: anyhow::anyhow!("{message}") }
}
