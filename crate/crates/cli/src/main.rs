#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod experiments;
mod output;

use experiments::{CliError, Overrides};

#[derive(Parser)]
#[command(
    name = "serf-sim",
    version,
    about = "Light storage in a spin-exchange-relaxation-free vapour"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its data, fits and manifest to --out.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    MapStorage,
    MapRetrieval,
    FullTransform,
    EraserScan,
    Collide,
    LifetimeScan,
    Tomography,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MapStorage => "map-storage",
            Experiment::MapRetrieval => "map-retrieval",
            Experiment::FullTransform => "full-transform",
            Experiment::EraserScan => "eraser-scan",
            Experiment::Collide => "collide",
            Experiment::LifetimeScan => "lifetime-scan",
            Experiment::Tomography => "tomography",
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    experiment: Experiment,

    /// TOML file with a [cesium] table.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// RNG seed; a random one is drawn and recorded when omitted.
    #[arg(long)]
    seed: Option<u64>,

    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match experiments::run(
        args.experiment,
        args.config.as_deref(),
        &args.out,
        args.seed,
        &args.overrides,
    ) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Numerical(_) => 3,
                CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
            })
        }
    }
}
