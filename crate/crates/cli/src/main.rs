//! `profile-gan`: ingest historical data, train GANs, synthesize yearly
//! profiles and evaluate them against traditional baselines.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "profile-gan",
    version,
    about = "GAN-based synthesis of long-term hourly generation profiles"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate hourly data + site metadata and write a profile store.
    Ingest(IngestArgs),
    /// Train single-type GANs or one multi-type GAN on a store.
    Train(TrainArgs),
    /// Synthesize one yearly profile per forecast target.
    Generate(GenerateArgs),
    /// Score generated profiles against history.
    Evaluate(EvaluateArgs),
    /// Score generated profiles next to the average-profile and
    /// random-sampling baselines.
    Compare(EvaluateArgs),
    /// Write a store of synthetic profiles from parametric families.
    SynthData(SynthDataArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV with columns timestamp,site_id,power_mw.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// CSV with columns site_id,type,capacity_mw,intermittent.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Accepted type labels (comma separated); defaults to the built-in set.
    #[arg(long, value_delimiter = ',')]
    pub types: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Profile store directory.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// `single` (one GAN per type) or `multi` (one GAN for all types).
    #[arg(long, default_value = "single")]
    pub mode: String,
    /// Train only this type (single mode).
    #[arg(long = "type")]
    pub type_label: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Checkpoint file; repeat for several single-type models.
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    /// CSV with columns site_id,type,target_year,annual_energy_mwh,capacity_mw.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Forced outage rate; enables outage injection.
    #[arg(long = "for")]
    pub forced_outage_rate: Option<f64>,
    /// Mean time to repair in hours (default 24).
    #[arg(long)]
    pub mttr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Output directory of `generate`, or a profile store.
    #[arg(long)]
    pub generated: PathBuf,
    /// Historical profile store.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Evaluate only this site.
    #[arg(long)]
    pub site: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthDataArgs {
    /// TOML or JSON file with `families` and `years`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Built-in families (solar, wind, peaker), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Calendar years, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub years: Option<Vec<i32>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_for(&e))
        }
    }
}
