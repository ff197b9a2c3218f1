use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cpsmooth::output::{self, write_all};
use cpsmooth::suite::{lemma_suite, SuiteSizes};
use cpsmooth::{run, shapes, ExperimentConfig, HarnessError, RunOptions};
use cpsmooth_core::approx::DEFAULT_SERIES_TOL;
use cpsmooth_core::bounds::Quadrature;

#[derive(Parser)]
#[command(name = "cpsmooth", version, about = "Compound Poisson smoothing-bound experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write results.csv, summary.json and figures/.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run grid points above the atom-count guardrail.
        #[arg(long)]
        force: bool,
    },
    /// Run a randomized validator suite and report its pass counts.
    Validate {
        #[arg(long, value_enum)]
        suite: SuiteName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print bound shapes for a config as CSV, without exact distributions.
    Shapes {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Lemmas,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<u8, HarnessError> {
    match command {
        Command::Run { config, out, seed, force } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let dir = out.unwrap_or_else(|| config.output.clone());
            let report = run(&config, RunOptions { force })?;
            let summary = write_all(&report, &dir)?;
            println!(
                "{}: {} rows written to {}, {} hard failures",
                summary.scenario,
                summary.rows,
                dir.display(),
                summary.hard_failures
            );
            Ok(if summary.hard_failures == 0 { 0 } else { 1 })
        }
        Command::Validate { suite: SuiteName::Lemmas, seed } => {
            let report = lemma_suite(seed, &SuiteSizes::default(), &Quadrature::default(), DEFAULT_SERIES_TOL);
            for (check, s) in output::summarize_suite(&report) {
                println!("{check:<28} {:>4} records {:>4} passed {:>4} failed", s.records, s.passed, s.failed);
            }
            for e in report.entries.iter().filter(|e| e.is_hard_failure()) {
                eprintln!("FAIL {} #{}: {:?}", e.family, e.instance, e.outcome);
            }
            Ok(if report.hard_failures() == 0 { 0 } else { 1 })
        }
        Command::Shapes { config } => {
            let config = ExperimentConfig::load(&config)?;
            let report = shapes(&config)?;
            output::write_shapes(&report, io::stdout().lock())?;
            Ok(0)
        }
    }
}
