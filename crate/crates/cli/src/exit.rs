use std::fmt;
use std::process::ExitCode;

use falqon_core::Error;

pub const CONFIG: u8 = 2;
pub const RESOURCE: u8 = 3;
pub const BRACKET: u8 = 4;
pub const SELFCHECK: u8 = 5;
pub const OTHER: u8 = 1;

/// Bad flags, config files or input paths.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// One or more self-check items failed; details are already printed.
#[derive(Debug)]
pub struct SelfcheckFailed(pub Vec<String>);

impl fmt::Display for SelfcheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "self-check failed: {}", self.0.join(", "))
    }
}

impl std::error::Error for SelfcheckFailed {}

pub fn code_for(err: &anyhow::Error) -> ExitCode {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return ExitCode::from(CONFIG);
        }
        if cause.is::<SelfcheckFailed>() {
            return ExitCode::from(SELFCHECK);
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return ExitCode::from(match e {
                Error::Bracket(_) | Error::ThresholdNotReached { .. } => BRACKET,
                Error::QubitLimit { .. } | Error::BudgetExhausted { .. } => RESOURCE,
                Error::InvalidGraph(_)
                | Error::Parse { .. }
                | Error::InvalidParameter(_)
                | Error::EmptyEnsemble
                | Error::DimensionMismatch { .. } => CONFIG,
                _ => OTHER,
            });
        }
    }
    ExitCode::from(OTHER)
}
