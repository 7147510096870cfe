use std::fmt;

use ostro_core::{Error, EvalError, IntegrateError};

/// Failure with its process exit code: 2 for configuration and parse
/// errors, 3 for degenerate Lagrangians, 4 for integration failures.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const CONFIG: u8 = 2;
pub const DEGENERATE: u8 = 3;
pub const INTEGRATION: u8 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: CONFIG,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        CliError::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn integration_code(e: &IntegrateError) -> u8 {
    match e {
        IntegrateError::InvalidConfig(_)
        | IntegrateError::DimensionMismatch { .. }
        | IntegrateError::InvalidSpan { .. }
        | IntegrateError::Eval(EvalError::MissingParameter(_) | EvalError::MissingDeriv(_)) => {
            CONFIG
        }
        _ => INTEGRATION,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DegenerateLagrangian { .. } | Error::MissingExplicitForm => DEGENERATE,
            Error::Integration(ie) => integration_code(ie),
            Error::Eval(EvalError::NonFinite(_)) => INTEGRATION,
            _ => CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        CliError {
            code: integration_code(&e),
            message: e.to_string(),
        }
    }
}
