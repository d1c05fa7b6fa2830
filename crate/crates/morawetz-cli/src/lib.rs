//! Batch driver around `morawetz-core`: loads a JSON configuration, fans
//! independent certifications and evolutions out over a thread pool, and
//! writes deterministic JSON/CSV reports.
//!
//! Every command is a pure function of the configuration and seed, so a
//! repeated invocation reproduces its output files byte for byte except for
//! the single timestamp header each file carries. Parallel maps collect
//! into input order before any reduction; the thread count never affects
//! the bytes written.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

/// Failure taxonomy shared by the commands, each mapping to a process exit
/// code: configuration and usage problems exit 1, a multiplier family that
/// fails certification exits 2, an evolution aborting on norm growth
/// exits 3.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable, or inconsistent configuration; also covers
    /// output IO failures.
    Config(String),
    /// A check or oracle the command is expected to satisfy did not hold.
    Failed(String),
    /// The requested multiplier parameter fails the certification checks.
    Inadmissible(String),
    /// An evolution exceeded the growth guard and was aborted.
    Unstable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Failed(_) => 1,
            CliError::Inadmissible(_) => 2,
            CliError::Unstable(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Failed(msg) => write!(f, "check failed: {msg}"),
            CliError::Inadmissible(msg) => write!(f, "inadmissible parameter: {msg}"),
            // The solver's message already names the failure and the step.
            CliError::Unstable(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// The subcommands, named as they appear on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Verify,
    ScanAlpha,
    Constants,
    Evolve,
    CheckTheorem1,
}

/// One resolved invocation: the subcommand plus the shared flags.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: CommandKind,
    pub config_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Worker-thread count: the `--threads` flag wins, then the
/// `MORAWETZ_THREADS` environment variable, then the library default.
/// A set-but-unparsable variable is reported rather than ignored.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("MORAWETZ_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("MORAWETZ_THREADS = {raw:?} is not a thread count")))?;
            if n == 0 {
                return Err(CliError::Config("MORAWETZ_THREADS must be positive".into()));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn make_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
}

/// Load the configuration, apply flag overrides, and dispatch. Output files
/// are written before a verdict-style failure is returned, so a nonzero
/// exit still leaves the reports on disk.
pub fn run(invocation: &Invocation) -> Result<(), CliError> {
    let mut cfg = match &invocation.config_path {
        Some(path) => config::Config::load(path)?,
        None => config::Config::default(),
    };
    if let Some(seed) = invocation.seed {
        cfg.seed = seed;
    }
    let out_dir = invocation
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let pool = make_pool(resolve_threads(invocation.threads)?)?;

    match invocation.command {
        CommandKind::Verify => commands::verify::run(&cfg, &out_dir, &pool),
        CommandKind::ScanAlpha => commands::scan::run(&cfg, &out_dir, &pool),
        CommandKind::Constants => commands::constants::run(&cfg, &out_dir, &pool),
        CommandKind::Evolve => commands::evolve::run(&cfg, &out_dir, &pool),
        CommandKind::CheckTheorem1 => commands::theorem1::run(&cfg, &out_dir, &pool),
    }
}
