use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use otfs::cli::{self, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(
    name = "otfs",
    version,
    about = "MIMO OFDM-based OTFS simulation and capacity experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo ergodic capacity of OTFS and OFDM over the noise grid.
    Capacity(RunArgs),
    /// One block through the full transceiver chain.
    Simulate(RunArgs),
    /// Invariant suite at the configured dimensions.
    Verify(RunArgs),
    /// Dump the end-to-end effective matrix.
    EffectiveChannel(RunArgs),
    /// Print the configuration JSON schema.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Override run.trials.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Override run.seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Worker threads; affects speed only.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

fn execute(mode: Mode, args: &RunArgs) -> Result<bool, (i32, String)> {
    let fail = |e: otfs::Error| (cli::exit_code(&e), format!("error: {e}"));
    let mut cfg = ExperimentConfig::load(&args.config).map_err(fail)?;
    if let Some(t) = args.trials {
        cfg.run.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = args.threads {
        if k == 0 {
            return Err((
                cli::EXIT_CONFIG,
                "error: --threads must be at least 1".into(),
            ));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| {
        (
            cli::EXIT_IO,
            format!("error: cannot start worker threads: {e}"),
        )
    })?;
    let output = pool.install(|| cli::run(mode, &cfg)).map_err(fail)?;
    cli::write_artifacts(&args.out, &output.artifacts).map_err(fail)?;
    for line in &output.summary {
        println!("{line}");
    }
    println!(
        "wrote {} file(s) to {}",
        output.artifacts.len(),
        args.out.display()
    );
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Capacity(a) => (Mode::Capacity, a),
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Verify(a) => (Mode::Verify, a),
        Command::EffectiveChannel(a) => (Mode::EffectiveChannel, a),
        Command::Schema => {
            print!("{}", cli::CONFIG_SCHEMA);
            return ExitCode::SUCCESS;
        }
    };
    match execute(mode, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("invariant check failed");
            ExitCode::from(cli::EXIT_INVARIANT as u8)
        }
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code as u8)
        }
    }
}
