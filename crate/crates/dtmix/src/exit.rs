//! Process exit codes. These values are stable.

use dtmix_core::{Error, ErrorKind};

pub const OK: u8 = 0;
pub const SELFCHECK_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const INFEASIBLE: u8 = 4;
pub const DEGENERATE: u8 = 5;

pub fn for_error(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Usage => USAGE,
        ErrorKind::Io => IO,
        ErrorKind::Infeasible => INFEASIBLE,
        ErrorKind::Degenerate => DEGENERATE,
    }
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: for_error(&e), message: e.to_string() }
    }
}
