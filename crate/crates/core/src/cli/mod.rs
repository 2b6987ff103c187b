//! Command-line front end.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_calibrate, cmd_evaluate, cmd_generate, cmd_predict, cmd_reject, cmd_run, cmd_train,
    group_records, Context,
};
pub use config::{DataConfig, EvalConfig, ExperimentConfig};

use crate::error::Result;
use crate::methods::MethodKind;

#[derive(Debug, Parser)]
#[command(
    name = "dirconf",
    version,
    about = "Evidential classifiers and confidence calibration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build train/val/test dataset files.
    Generate(CommonArgs),
    /// Train every (method, seed) job and write checkpoints.
    Train(CommonArgs),
    /// Write validation and test prediction logs.
    Predict(CommonArgs),
    /// Fit and apply piece-wise linear calibration maps.
    Calibrate(CommonArgs),
    /// Compute metrics with and without calibration.
    Evaluate(CommonArgs),
    /// Sweep confidence thresholds for the reject option.
    Reject(CommonArgs),
    /// Run every stage in order.
    Run(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated seeds (overrides `seeds`).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Comma-separated methods (overrides `methods`).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<MethodKind>>,
    /// Suppress progress output.
    #[arg(long)]
    pub quiet: bool,
}

impl clap::ValueEnum for MethodKind {
    fn value_variants<'a>() -> &'a [Self] {
        &MethodKind::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<Context> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(seeds) = &self.seeds {
            config.seeds = seeds.clone();
        }
        if let Some(methods) = &self.methods {
            config.methods = methods.clone();
        }
        Context::new(config, self.quiet)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let (args, f): (&CommonArgs, fn(&Context) -> Result<()>) = match &cli.command {
        Command::Generate(a) => (a, cmd_generate),
        Command::Train(a) => (a, cmd_train),
        Command::Predict(a) => (a, cmd_predict),
        Command::Calibrate(a) => (a, cmd_calibrate),
        Command::Evaluate(a) => (a, |c| cmd_evaluate(c).map(drop)),
        Command::Reject(a) => (a, |c| cmd_reject(c).map(drop)),
        Command::Run(a) => (a, cmd_run),
    };
    f(&args.resolve()?)
}
