//! Command-line front end for the multi-IRS outage analysis library:
//! config parsing, sweep execution, and CSV reporting.
//!
//! The binary lives in `main.rs`; everything it does goes through this
//! library so the behavior is testable in-process.

pub mod config;
pub mod sweep;

pub use config::{emit_config, parse_config, preset_config, RunConfig};
pub use sweep::{run_sweep, OutputKind, SweepAxis, SweepSpec};

/// Errors carrying the process exit code contract: usage errors exit 1,
/// validation errors 2, numeric/accuracy errors 3.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: missing inputs, unreadable files, conflicting flags.
    Usage(String),
    /// The document or derived objects violate an invariant.
    Validation(String),
    /// A numeric evaluation failed at run time.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Validation(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Validation(m) => write!(f, "validation error: {m}"),
            Self::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<risout_core::analytic::AnalyticError> for CliError {
    fn from(e: risout_core::analytic::AnalyticError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<risout_core::montecarlo::McError> for CliError {
    fn from(e: risout_core::montecarlo::McError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<risout_core::optimizer::GridSearchError> for CliError {
    fn from(e: risout_core::optimizer::GridSearchError) -> Self {
        Self::Numeric(e.to_string())
    }
}

/// Full-precision decimal formatting for CSV and reports: shortest string
/// that parses back to the identical f64.
pub fn fmt_full(v: f64) -> String {
    format!("{v:e}")
}
