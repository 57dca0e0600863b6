use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ppswap_cli::config::RunConfig;
use ppswap_cli::{run, CliError, Command, Format};

/// Game analysis of cross-ledger swaps executed as packetized payments.
#[derive(Debug, Parser)]
#[command(name = "ppswap", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format. `sweep` defaults to delimited, everything else to structured.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Simulation seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of simulated swaps; overrides the config.
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Simulation worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Solve the game and print strategies, node values and honesty verdicts.
    Solve,
    /// Print the honesty and collateral thresholds.
    Thresholds,
    /// Compare solver verdicts with the closed forms over a grid.
    Verify,
    /// Estimate the failure rate by seeded simulation.
    Simulate,
    /// Solve every point of the configured grid.
    Sweep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Structured,
    Delimited,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    let workers = match cli.workers {
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Thresholds => Command::Thresholds,
        Cmd::Verify => Command::Verify,
        Cmd::Simulate => Command::Simulate,
        Cmd::Sweep => Command::Sweep,
    };
    let format = match cli.format {
        Some(FormatArg::Structured) => Format::Structured,
        Some(FormatArg::Delimited) => Format::Delimited,
        None => command.default_format(),
    };

    let output = run(command, &config, format, workers)?;
    for note in &output.notes {
        eprintln!("{note}");
    }
    match &cli.out {
        Some(path) => std::fs::write(path, &output.body)
            .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Internal(format!("writing output: {e}")))?;
        }
    }
    Ok(output.passed)
}
