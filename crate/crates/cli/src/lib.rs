//! Batch front end: argument parsing, run configuration and dispatch.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 resource limit,
//! 4 failed bound check under `--assert`, 5 I/O error.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use report::{emit_report, Format, Report, Row, Series};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "REGRETLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "regretlab", version, about = "Minimax regret of finite games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CommandArg {
    /// Minimax value with a randomized player.
    Value,
    /// Stochastic regret of an adversary strategy.
    Regret,
    /// Divergence decomposition of a strategy's regret.
    Decompose,
    /// Constant estimates and upper-bound checks.
    Bounds,
    /// A self-contained demonstration.
    Demo {
        /// quadratic, c-sequence, ball, experts or interval.
        name: String,
    },
    /// The i.i.d. / product / joint / minimax hierarchy.
    Hierarchy,
    /// value, regret, decompose and bounds together.
    Report,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Built-in game name.
    #[arg(long, global = true)]
    pub builtin: Option<String>,
    /// Game specification file (TOML).
    #[arg(long, global = true)]
    pub game: Option<PathBuf>,
    /// Horizon.
    #[arg(long = "T", global = true)]
    pub horizon: Option<usize>,
    /// Number of outcomes or experts for built-in games.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Dimension of the ball game.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Grid, lattice or polygon resolution of a built-in game.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo samples and sampled pairs.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub samples: usize,
    /// Cap on enumerated sequences and states.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub budget: u64,
    /// CSV output path; plot data goes next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Exit with code 4 when a bound check fails.
    #[arg(long, global = true)]
    pub assert: bool,
    /// Adversary strategy (default depends on the game).
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// Matrix-game solver: lp, exhaustive or mw.
    #[arg(long, global = true, default_value = "lp")]
    pub solver: String,
    /// Dual optimizer: grid or coordinate-ascent.
    #[arg(long, global = true, default_value = "grid")]
    pub optimizer: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Value,
    Regret,
    Decompose,
    Bounds,
    Demo(String),
    Hierarchy,
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSource {
    Builtin(String),
    File(PathBuf),
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<GameSource>,
    pub horizon: Option<usize>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub grid: Option<usize>,
    pub seed: u64,
    pub samples: usize,
    pub budget: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub assert: bool,
    pub strategy: Option<String>,
    pub solver: String,
    pub optimizer: String,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let o = cli.options;
        let command = match cli.command {
            CommandArg::Value => Command::Value,
            CommandArg::Regret => Command::Regret,
            CommandArg::Decompose => Command::Decompose,
            CommandArg::Bounds => Command::Bounds,
            CommandArg::Demo { name } => Command::Demo(name),
            CommandArg::Hierarchy => Command::Hierarchy,
            CommandArg::Report => Command::Report,
        };
        let source = match (o.builtin, o.game) {
            (Some(_), Some(_)) => {
                return Err(CliError::Invalid(
                    "give exactly one game source: --builtin or --game".into(),
                ))
            }
            (Some(b), None) => Some(GameSource::Builtin(b)),
            (None, Some(p)) => Some(GameSource::File(p)),
            (None, None) => None,
        };
        if source.is_none() && !matches!(command, Command::Demo(_)) {
            return Err(CliError::Invalid(
                "give exactly one game source: --builtin or --game".into(),
            ));
        }
        if o.horizon == Some(0) {
            return Err(CliError::Invalid("--T must be at least 1".into()));
        }
        if o.samples < 2 {
            return Err(CliError::Invalid("--samples must be at least 2".into()));
        }
        if o.budget == 0 {
            return Err(CliError::Invalid("--budget must be positive".into()));
        }
        Ok(RunConfig {
            command,
            source,
            horizon: o.horizon,
            n: o.n,
            d: o.d,
            grid: o.grid,
            seed: o.seed,
            samples: o.samples,
            budget: o.budget,
            out: o.out,
            format: o.format,
            assert: o.assert,
            strategy: o.strategy,
            solver: o.solver,
            optimizer: o.optimizer,
        })
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Invalid(format!("{THREADS_ENV} must be a positive integer"))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}

fn execute(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let pool = thread_pool()?;
    let report = pool.install(|| match &config.command {
        Command::Value => commands::value(config),
        Command::Regret => commands::regret(config),
        Command::Decompose => commands::decompose(config),
        Command::Bounds => commands::bounds(config),
        Command::Demo(name) => commands::demo(config, name),
        Command::Hierarchy => commands::hierarchy(config),
        Command::Report => commands::report(config),
    })?;
    emit_report(
        &report,
        config.format,
        config.out.as_deref(),
        stdout,
        stderr,
    )?;
    let failed = report.failed_checks();
    if config.assert && !failed.is_empty() {
        let names: Vec<&str> = failed.iter().map(|r| r.quantity.as_str()).collect();
        return Err(CliError::BoundFailed(format!(
            "failed checks: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

/// Runs a validated configuration, writing to the given streams.
pub fn run_with(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(config, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.diagnostic());
            e.exit_code()
        }
    }
}

pub fn run(config: &RunConfig) -> i32 {
    run_with(
        config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// Parses `args` (including the program name) and runs them.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::Invalid(e.kind().to_string());
            let _ = writeln!(stderr, "{}", err.diagnostic());
            let _ = write!(stderr, "{}", e.render());
            return err.exit_code();
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(config) => run_with(&config, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.diagnostic());
            e.exit_code()
        }
    }
}
