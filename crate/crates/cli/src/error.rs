use std::fmt;

use ybsim_core::error::Error;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PROPERTY_G: i32 = 3;
pub const EXIT_SCALE: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        CliError { code: EXIT_MISMATCH, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PropertyGViolated { .. } => EXIT_PROPERTY_G,
            Error::OracleCapExceeded { .. } | Error::ObservableTooLarge { .. } | Error::GroupOrderCap { .. } => {
                EXIT_SCALE
            }
            Error::MixedQ | Error::NotFamilyFour(_) => EXIT_MISMATCH,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::input(format!("malformed JSON: {e}"))
    }
}
