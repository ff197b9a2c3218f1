//! Experiment harness for the smoothing-bound library: configuration
//! loading, grid runs, randomized validator suites and result files.

pub mod config;
pub mod output;
pub mod run;
pub mod suite;

pub use config::{ExperimentConfig, Scenario};
pub use run::{run, shapes, RunOptions, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error(
        "grid point {id} needs about {estimate:.3e} atoms, above the {limit:.0e} limit; pass --force to run it anyway"
    )]
    Guardrail { id: usize, estimate: f64, limit: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: every harness error is an input problem.
    pub fn exit_code(&self) -> u8 {
        2
    }
}
