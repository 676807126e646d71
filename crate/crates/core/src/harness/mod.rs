//! Simulation harness: configuration, the complexity model, Monte Carlo
//! chains, MI and LLR sweeps, CSV output and the command-line front end.

pub mod cli;
pub mod complexity;
pub mod config;
pub mod output;
pub mod sim;
pub mod sweeps;

use thiserror::Error;

pub use cli::cli_main;
pub use complexity::{complexity_bicm, complexity_msd, overall_rate, Complexity};
pub use config::{LlrMode, SimConfig, SimScheme};
pub use sim::{run_ber_sim, run_wrapped_point, Chain, SimRecord, WrappedPoint};
pub use sweeps::{run_llr_check, run_mi_curve, LlrRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Constellation(#[from] crate::constellation::ConstellationError),
    #[error(transparent)]
    Fec(#[from] crate::fec::FecError),
    #[error(transparent)]
    Info(#[from] crate::infotheory::InfoError),
}

impl HarnessError {
    /// Exit status: 2 for usage and configuration mistakes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownKey(_) => 2,
            _ => 1,
        }
    }
}
