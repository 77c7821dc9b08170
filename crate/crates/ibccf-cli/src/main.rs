//! Command-line front end: track a sequence directory, score results,
//! render synthetic sequences, and cross-check the solvers.

mod checks;
mod commands;
mod config;
mod seqio;

use std::env;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ibccf::IbccfError;

/// Failure classes, one exit code each. Bad invocations and bad config
/// files are usage errors (2), unreadable or inconsistent inputs are data
/// errors (3), and anything that went wrong while the math was running is
/// a numerical error (4).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<IbccfError> for CliError {
    fn from(e: IbccfError) -> Self {
        let msg = e.to_string();
        match e {
            IbccfError::InvalidParameter { .. }
            | IbccfError::InvalidBox(_)
            | IbccfError::SynthFailure(_) => CliError::Usage(msg),
            IbccfError::ShapeMismatch(_) | IbccfError::InvalidSequence(_) => CliError::Data(msg),
            IbccfError::NoOverlap
            | IbccfError::OutOfFrame
            | IbccfError::UndefinedAngle
            | IbccfError::NumericalFailure { .. }
            | IbccfError::InitFailure(_) => CliError::Numerical(msg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Log {
    Quiet,
    Info,
    Debug,
}

impl Log {
    fn parse(s: &str) -> Option<Log> {
        match s {
            "quiet" => Some(Log::Quiet),
            "info" => Some(Log::Info),
            "debug" => Some(Log::Debug),
            _ => None,
        }
    }

    pub fn info(self) -> bool {
        self >= Log::Info
    }

    pub fn debug(self) -> bool {
        self >= Log::Debug
    }
}

#[derive(Parser)]
#[command(name = "ibccf", version, about = "Boundary-aware correlation filter tracker")]
struct Cli {
    /// Verbosity: quiet, info, or debug
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one sequence directory and write results plus diagnostics
    Track {
        /// Sequence directory holding img/ and a ground-truth file
        #[arg(long)]
        seq: PathBuf,
        /// Output directory for results.txt, diagnostics.log, manifest.txt
        #[arg(long)]
        out: PathBuf,
        /// key = value tracker configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the near-orthogonality weight
        #[arg(long)]
        mu: Option<f64>,
        /// Track translation only, with a fixed box size
        #[arg(long)]
        disable_boundaries: bool,
    },
    /// Score a results file against a sequence's ground truth
    Eval {
        /// results.txt produced by track (x,y,w,h per line)
        results: PathBuf,
        /// Sequence directory the results were tracked on
        #[arg(long)]
        seq: PathBuf,
        /// Output directory for metrics.txt and success_curve.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a synthetic sequence from a schedule file
    Synth {
        /// key = value schedule description
        spec: PathBuf,
        /// Directory the sequence directory is created under
        #[arg(long)]
        out: PathBuf,
        /// Override the seed given in the schedule file
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the fast solvers against slow reference implementations
    Selftest {
        #[arg(long, hide = true)]
        perturb_uk: bool,
    },
}

fn thread_cap_from_env() -> Result<(), CliError> {
    let raw = match env::var("IBCCF_THREADS") {
        Ok(v) => v,
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(env::VarError::NotUnicode(_)) => {
            return Err(CliError::Usage("IBCCF_THREADS is not valid unicode".into()))
        }
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!("IBCCF_THREADS must be a positive integer, got `{raw}`"))
        })?;
    ibccf::set_thread_cap(n).map_err(CliError::from)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let log = Log::parse(&cli.log_level).ok_or_else(|| {
        CliError::Usage(format!(
            "--log-level must be quiet, info, or debug, got `{}`",
            cli.log_level
        ))
    })?;
    thread_cap_from_env()?;
    match cli.command {
        Command::Track { seq, out, config, mu, disable_boundaries } => {
            commands::cmd_track(&seq, &out, config.as_deref(), mu, disable_boundaries, log)
        }
        Command::Eval { results, seq, out } => commands::cmd_eval(&results, &seq, &out, log),
        Command::Synth { spec, out, seed } => commands::cmd_synth(&spec, &out, seed, log),
        Command::Selftest { perturb_uk } => checks::cmd_selftest(perturb_uk),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version surface as Err but are not failures
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
