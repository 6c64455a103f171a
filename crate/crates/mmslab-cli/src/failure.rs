use std::fmt;
use std::process::ExitCode;

use serde::Serialize;

/// An error with its exit code, written to stderr as JSON.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub error: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl Failure {
    fn new(error: &'static str, exit_code: u8, message: impl Into<String>) -> Self {
        Failure { error, message: message.into(), exit_code }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new("parse", 1, message)
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new("schema", 1, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io", 1, message)
    }

    pub fn size_guard(message: impl Into<String>) -> Self {
        Self::new("size-guard", 2, message)
    }

    pub fn acceptance(message: impl Into<String>) -> Self {
        Self::new("acceptance", 3, message)
    }

    pub fn from_anyhow(e: anyhow::Error) -> Self {
        let e = match e.downcast::<Failure>() {
            Ok(f) => return f,
            Err(e) => e,
        };
        match e.downcast::<mmslab::Error>() {
            Ok(err @ mmslab::Error::SizeGuard { .. }) => Self::size_guard(err.to_string()),
            Ok(err) => Self::new("invalid-input", 1, err.to_string()),
            Err(other) => Self::new("invalid-input", 1, format!("{other:#}")),
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", serde_json::to_string(self).expect("error serialises"));
        ExitCode::from(self.exit_code)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.error, self.message)
    }
}

impl std::error::Error for Failure {}
