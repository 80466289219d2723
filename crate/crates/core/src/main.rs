use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memsim::config::{parse_config, Mode, Overrides};
use memsim::output::MANIFEST_FILE;
use memsim::{runner, Error, Result};

#[derive(Parser)]
#[command(name = "memsim", version, about = "Flux-feedback quantum memristor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the circuit into Hamiltonian coefficients.
    DeriveParams(Common),
    /// Run the feedback dynamics and the hysteresis analysis.
    Simulate(Common),
    /// Run the dynamics and sample pairwise quantum discord.
    Discord(Common),
    /// Compute hysteresis metrics for an existing trajectory CSV.
    Analyze(Common),
    /// Run one simulation per value of the configured sweep axis.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (overrides `workers`).
    #[arg(long)]
    workers: Option<usize>,
    /// Base optimizer seed (overrides `discord.optimizer.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(mode: Mode, args: &Common) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut config = parse_config(&text)?;
    config.apply(&Overrides {
        mode: Some(mode),
        output_dir: args.out.clone(),
        workers: args.workers,
        seed: args.seed,
    });
    let config = config.resolve()?;
    let written = runner::execute(&config, std::slice::from_ref(&args.config))?;
    for r in &written {
        println!("{}", config.output_dir.join(&r.path).display());
    }
    println!("{}", config.output_dir.join(MANIFEST_FILE).display());
    if mode == Mode::DeriveParams {
        let text = std::fs::read_to_string(config.output_dir.join("derive_params.json"))
            .map_err(|e| Error::io(config.output_dir.join("derive_params.json"), e))?;
        print!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::DeriveParams(a) => (Mode::DeriveParams, a),
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Discord(a) => (Mode::Discord, a),
        Command::Analyze(a) => (Mode::Analyze, a),
        Command::Sweep(a) => (Mode::Sweep, a),
    };
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("memsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
