use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod failure;
mod input;
mod output;
mod probe;

use failure::Failure;

#[derive(Parser)]
#[command(name = "mmslab", version, about = "Finite metric measure space laboratory")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct Global {
    /// Master seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the report; standard output when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Where to write the CSV table, for commands that have one.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Largest space read or generated.
    #[arg(long, global = true, default_value_t = 4096)]
    pub max_points: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a model space as JSON.
    Gen(commands::GenArgs),
    /// Solve the bounded-Lipschitz program on two glued spaces.
    Flr(commands::FlrArgs),
    /// Threshold functional on two glued spaces.
    Fx(commands::FxArgs),
    /// Certified interval for the pointed distance between two spaces.
    Compare(commands::CompareArgs),
    /// Distances to the three model spaces across scales.
    TangentScan(commands::ScanArgs),
    /// Besicovitch pairs of a space.
    Pairs(commands::PairsArgs),
    /// Classify an approximately uniform space.
    Classify(commands::ClassifyArgs),
    /// Geometric probes.
    #[command(subcommand)]
    Probe(probe::ProbeCommand),
    /// Run the acceptance suite.
    Accept(commands::AcceptArgs),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("MMSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::parse(format!("MMSLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::parse(e.to_string()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    let g = &cli.global;
    match cli.command {
        Command::Gen(a) => commands::gen(g, &a),
        Command::Flr(a) => commands::flr(g, &a),
        Command::Fx(a) => commands::fx(g, &a),
        Command::Compare(a) => commands::compare(g, &a),
        Command::TangentScan(a) => commands::tangent_scan(g, &a),
        Command::Pairs(a) => commands::pairs(g, &a),
        Command::Classify(a) => commands::classify(g, &a),
        Command::Probe(p) => probe::run(g, &p),
        Command::Accept(a) => commands::accept(g, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::parse(e.to_string().trim_end()).report(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => Failure::from_anyhow(e).report(),
    }
}
