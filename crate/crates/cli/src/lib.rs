//! Command-line front end: parses flags, loads the strict config, runs one subcommand,
//! writes CSV and report files, and maps the outcome to an exit code.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use contraction_core::config::ExperimentConfig;
use contraction_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Caps the rayon pool when set.
pub const THREADS_VAR: &str = "CONTRACTION_LAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cli: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cli: {0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_usage() => EXIT_USAGE,
            CliError::Core(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_NUMERICAL,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "contraction-lab", version, about = "a-contraction with shifts for 1-D balance laws")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of grids in a refinement study (each twice as fine as the last).
    #[arg(long, global = true, default_value_t = 1, value_name = "K")]
    pub grid_levels: usize,
    /// No summary line, errors only in the log.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the extremal Hugoniot locus of `hugoniot.base`.
    Hugoniot,
    /// Liu, strength, admissibility and dissipation-bound certificates over sampled base states.
    CheckHypotheses,
    /// Run the finite-volume solver on the perturbed shock.
    Simulate {
        /// Keep every this many steps in the CSV.
        #[arg(long, default_value_t = 10)]
        stride: usize,
    },
    /// Fit the weight `a` and the constants of the shift.
    FitConstants,
    /// Integrate the shift and check the pointwise dissipation inequality.
    Shift,
    /// Full run: weighted relative entropy, envelope fit and shift control.
    VerifyContraction,
    /// Step-by-step dissipation balance of the weighted functional.
    AuditDissipation,
}

/// Settings shared by every subcommand after flags are applied.
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub levels: usize,
    pub quiet: bool,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
    // a pool may already exist when run() is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn context(common: &Common) -> Result<Context, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    if !path.is_file() {
        return Err(CliError::Usage(format!("config file {} not found", path.display())));
    }
    let mut config = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if common.grid_levels == 0 || common.grid_levels > 6 {
        return Err(CliError::Usage("--grid-levels must lie in 1..=6".into()));
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output));
    Ok(Context { config, out, levels: common.grid_levels, quiet: common.quiet })
}

/// Parses `argv` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.common.quiet { log::LevelFilter::Error } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).parse_env("RUST_LOG").try_init();
    let result = init_threads().and_then(|_| context(&cli.common)).and_then(|ctx| commands::dispatch(&cli.command, &ctx));
    match result {
        Ok(outcome) => {
            if !cli.common.quiet {
                println!("{}", outcome.summary);
            }
            if outcome.pass {
                EXIT_OK
            } else {
                EXIT_CHECK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// What a subcommand reports back.
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}
