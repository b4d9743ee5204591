//! Process-level error classification.
//!
//! Every failure surfaced to the user falls into one of three buckets,
//! each with a fixed exit code: `1` for problems with how the tool was
//! invoked (flags, configuration values), `2` for problems with the
//! inputs it was pointed at (grammar files, datasets, manifests,
//! expressions), and `3` for violations of the tool's own guarantees
//! (a produced report failing its shipped schema, internal state errors).

use eqgram::chart::ChartError;
use eqgram::discover::DiscoverError;
use eqgram::expr::ExprError;
use eqgram::fit::FitError;
use eqgram::grammar::GrammarError;
use eqgram::sample::SampleError;
use std::fmt;

/// A fatal command error carrying its exit-code class.
#[derive(Debug)]
pub enum CliError {
    /// Invocation problem: bad flag combination or configuration value. Exit 1.
    Usage(String),
    /// Input problem: unreadable or invalid grammar, data, manifest, or
    /// expression. Exit 2.
    Data(String),
    /// The tool broke one of its own guarantees. Exit 3.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GrammarError> for CliError {
    fn from(e: GrammarError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<ChartError> for CliError {
    fn from(e: ChartError) -> CliError {
        match e {
            ChartError::InvalidTopK => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> CliError {
        match e {
            FitError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<DiscoverError> for CliError {
    fn from(e: DiscoverError) -> CliError {
        match e {
            DiscoverError::InvalidConfig(_) | DiscoverError::InvalidInput(_) => {
                CliError::Usage(e.to_string())
            }
            DiscoverError::Fit(FitError::InvalidConfig(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<eqgram::analytics::AnalyticsError> for CliError {
    fn from(e: eqgram::analytics::AnalyticsError) -> CliError {
        CliError::Data(e.to_string())
    }
}

/// Wraps filesystem errors with the path they concern; all I/O problems
/// count as data errors.
pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
