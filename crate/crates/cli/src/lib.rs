//! Library surface of the `infusim` command-line tool: configuration
//! loading, the five subcommand implementations, and plot rendering.
//! `main` is a thin argument-parsing wrapper so integration tests can
//! drive the exact same paths.

pub mod commands;
pub mod config;
pub mod plot;

use thiserror::Error;

use infusim_core::frac::FracError;
use infusim_core::lti::LtiError;
use infusim_core::patient::PatientError;
use infusim_core::pso::PsoError;
use infusim_core::sim::SimError;
use infusim_core::tuning::TuneError;

/// Command-line error with the documented exit-code mapping:
/// configuration/usage problems exit 1, numeric failures exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Divergence { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<TuneError> for CliError {
    fn from(e: TuneError) -> Self {
        match e {
            TuneError::NoFeasibleParticle => CliError::Numeric(e.to_string()),
            TuneError::Sim(SimError::Divergence { .. }) => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PatientError> for CliError {
    fn from(e: PatientError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<LtiError> for CliError {
    fn from(e: LtiError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PsoError> for CliError {
    fn from(e: PsoError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io error: {e}"))
    }
}
