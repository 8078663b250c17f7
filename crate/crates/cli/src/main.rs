use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chrom_oed::commands::{self, Backend, Ctx};
use chrom_oed::config::RunConfig;
use chrom_oed::CliResult;

#[derive(Parser)]
#[command(
    name = "chrom-oed",
    version,
    about = "Bayesian optimal experimental design for two-component column chromatography",
    long_about = "Simulate breakthrough curves, train a sparse-grid surrogate of the forward \
                  map, sweep the expected information gain over the design rectangle and sample \
                  parameter posteriors with DRAM. All commands are deterministic given the \
                  configuration file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Forward model used inside estimators and samplers.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Surrogate)]
    backend: BackendArg,

    /// Rewrite outputs even when they match the current configuration.
    #[arg(long, global = true)]
    force: bool,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward model at the configured design and write the curve
    /// plus one noisy observation file.
    Simulate,
    /// Generate noisy observation files for every configured observation
    /// count from one solver run.
    SynthData,
    /// Train (or resume) the sparse-grid surrogate and validate it against
    /// the solver.
    TrainSurrogate,
    /// Sweep the expected information gain over the design lattice.
    UtilityMap,
    /// Sample the parameter posterior with DRAM against synthetic data.
    Posterior,
    /// Compare wall-clock costs of the forward paths.
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Solver,
    Surrogate,
    Both,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Solver => Backend::Solver,
            BackendArg::Surrogate => Backend::Surrogate,
            BackendArg::Both => Backend::Both,
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    config.validate()?;
    let ctx = Ctx::new(config, cli.out.clone(), cli.force);
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&ctx),
        Command::SynthData => commands::cmd_synth_data(&ctx),
        Command::TrainSurrogate => commands::cmd_train_surrogate(&ctx),
        Command::UtilityMap => commands::cmd_utility_map(&ctx, cli.backend.into()),
        Command::Posterior => commands::cmd_posterior(&ctx, cli.backend.into()),
        Command::Bench => commands::cmd_bench(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
