use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meandim_cli::{default_jobs, run, CliError, ExperimentConfig, Invocation, Kind, SuiteName, BUDGET_ENV};

#[derive(Parser)]
#[command(name = "meandim", version, about = "Mean dimension and rate-distortion experiments on finite shift systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    /// JSON config naming the suite; optional when --name is given.
    #[arg(long, required_unless_present = "name")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    name: Option<SuiteName>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Covering-number bounds and their slope against log(1/ε).
    CoveringProfile(Common),
    /// Hausdorff dimension profile of a space or of a system's orbit metrics.
    DimProfile(Common),
    /// Rate-distortion curve of the uniform measure with slope report.
    RdCurve(Common),
    /// Frostman measure from the weighted-content LP.
    Frostman(Common),
    /// Frostman measures averaged along the orbit, with rate bound checks.
    NiceMeasure(Common),
    /// Voronoi tiling of a marker trace (plot-ready CSV).
    Tiling(Common),
    /// Projection dimension and rate-distortion of an algebraic action.
    Algebraic(Common),
    /// A registered worked example compared with its expected value.
    ExampleSuite(SuiteArgs),
}

fn invocation(cli: Cli) -> Result<Invocation, CliError> {
    let (kind, config, jobs, out, name) = match cli.command {
        Command::CoveringProfile(c) => (Kind::CoveringProfile, Some(c.config), c.jobs, c.out, None),
        Command::DimProfile(c) => (Kind::DimProfile, Some(c.config), c.jobs, c.out, None),
        Command::RdCurve(c) => (Kind::RdCurve, Some(c.config), c.jobs, c.out, None),
        Command::Frostman(c) => (Kind::Frostman, Some(c.config), c.jobs, c.out, None),
        Command::NiceMeasure(c) => (Kind::NiceMeasure, Some(c.config), c.jobs, c.out, None),
        Command::Tiling(c) => (Kind::Tiling, Some(c.config), c.jobs, c.out, None),
        Command::Algebraic(c) => (Kind::Algebraic, Some(c.config), c.jobs, c.out, None),
        Command::ExampleSuite(s) => (Kind::ExampleSuite, s.config, s.jobs, s.out, s.name),
    };
    let (mut cfg, bytes) = match &config {
        Some(path) => ExperimentConfig::load(path)?,
        None => (ExperimentConfig::for_suite(name.expect("clap requires --name")), Vec::new()),
    };
    if let Some(n) = name {
        cfg.suite = Some(n);
    }
    cfg.apply_env(std::env::var(BUDGET_ENV).ok().as_deref())?;
    Ok(Invocation { kind, config: cfg, config_bytes: bytes, config_path: config, jobs: jobs.unwrap_or_else(default_jobs), out })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match invocation(cli).and_then(|inv| run(&inv)) {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("meandim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
