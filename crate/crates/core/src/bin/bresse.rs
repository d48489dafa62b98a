use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use bresse_core::cli::{self, Command};
use bresse_core::{BresseError, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Validate,
    Spectrum,
    Resolvent,
    Simulate,
    DecayFit,
    Dichotomy,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Validate => Command::Validate,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Resolvent => Command::Resolvent,
            Cmd::Simulate => Command::Simulate,
            Cmd::DecayFit => Command::DecayFit,
            Cmd::Dichotomy => Command::Dichotomy,
        }
    }
}

/// Discretized damped Bresse beam: spectrum, resolvent growth and energy decay.
#[derive(Debug, Parser)]
#[command(name = "bresse", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("BRESSE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| BresseError::InvalidArgument(format!("BRESSE_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| BresseError::InvalidArgument(e.to_string()))
}

fn main_inner(args: Args) -> Result<()> {
    init_threads()?;
    let text = std::fs::read_to_string(&args.config).map_err(|e| BresseError::Io {
        path: args.config.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = cli::parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = cli::output_dir(&cfg, args.out.as_deref());
    let report = cli::run(args.command.into(), &cfg, &out)?;
    // a closed stdout (e.g. piped into `head`) is not an error of the run
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&report.summary).expect("summary serializes")
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
