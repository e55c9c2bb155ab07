use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use landscape_bounds::scenario::{run_scenario, Scenario, Stage};

#[derive(Parser)]
#[command(name = "landscape", version, about = "Landscape-function eigenvalue bounds for Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the landscape function and write landscape.csv.
    Landscape(Common),
    /// Counting curves from inertia and from box partitions.
    Count(Common),
    /// Verify the requested eigenvalue bounds.
    Bounds(Common),
    /// Iterate the shift towards the ground-state energy.
    Iterate(Common),
    /// Semiclassical ratios for radial problems.
    Asymptotics(Common),
    /// Everything requested in the scenario.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides the scenario's output_dir.
    #[arg(long, short, env = "LANDSCAPE_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, common) = match cli.command {
        Command::Landscape(c) => (Stage::Landscape, c),
        Command::Count(c) => (Stage::Count, c),
        Command::Bounds(c) => (Stage::Bounds, c),
        Command::Iterate(c) => (Stage::Iterate, c),
        Command::Asymptotics(c) => (Stage::Asymptotics, c),
        Command::Run(c) => (Stage::Run, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let scenario = match Scenario::from_path(&common.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let out = common
        .out
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match run_scenario(&scenario, stage, &out) {
        Ok(outcome) if outcome.passed => {
            println!("all checks passed; outputs in {}", out.display());
            ExitCode::SUCCESS
        }
        Ok(outcome) => {
            for line in &outcome.failures {
                eprintln!("FAIL {line}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
