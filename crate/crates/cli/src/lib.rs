//! Command-line front end for `nonsmooth-core`.
//!
//! The `nonsmooth` binary has four subcommands: `simulate` writes a
//! trajectory and its events file, `sweep` labels post-jump loads of the
//! drilling model, `compare` measures sup distances between solutions and
//! `check` evaluates the analytic stability conditions. Exit codes are 0 on
//! success, 1 for a malformed request and 2 when integration fails (the
//! partial trajectory is still written).

use std::fmt;
use std::path::Path;

pub mod cli;
pub mod commands;
pub mod output;
pub mod params;
pub mod spec;

pub use cli::run;

#[derive(Debug)]
pub enum CliError {
    /// Unknown model, bad parameter, malformed file or flag.
    Spec(String),
    Io(String),
    /// The solver failed; partial output has been written where possible.
    Integration(nonsmooth_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Io(_) => 1,
            CliError::Integration(_) => 2,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Spec(m) => write!(f, "invalid request: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Integration(e) => write!(f, "integration failed: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

fn is_spec_error(e: &nonsmooth_core::Error) -> bool {
    use nonsmooth_core::Error as E;
    match e {
        E::InvalidParameter { .. }
        | E::InvalidConfig(_)
        | E::UnsupportedModel(_)
        | E::DimensionMismatch { .. }
        | E::OutOfDomain
        | E::NoEquilibrium { .. }
        | E::Domain(_) => true,
        E::AtEpsilon { source, .. } => is_spec_error(source),
        _ => false,
    }
}

impl From<nonsmooth_core::Error> for CliError {
    fn from(e: nonsmooth_core::Error) -> Self {
        if is_spec_error(&e) {
            CliError::Spec(e.to_string())
        } else {
            CliError::Integration(e)
        }
    }
}
