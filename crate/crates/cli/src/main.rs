//! `walkpovm` command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification or runtime error, 2 malformed
//! input (bad flags, unreadable or invalid files, out-of-range parameters).

mod commands;
mod inputs;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use inputs::SeedSource;

#[derive(Parser, Debug)]
#[command(
    name = "walkpovm",
    version,
    about = "Split-step quantum walk SIC-POVM toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random draw.
    #[arg(long, global = true, env = "WALKPOVM_SEED")]
    pub seed: Option<u64>,

    /// Directory for output files; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct ScheduleArg {
    /// Schedule JSON file; the built-in reference schedule when absent.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct StateArg {
    /// Initial coin: 1..4, H, V, D, A, R, L, or a JSON file `{"h": [re, im], "v": [re, im]}`.
    #[arg(long, default_value = "1")]
    pub state: String,
}

#[derive(Args, Debug, Clone)]
pub struct NoiseArgs {
    /// Position-coherence retention per step, in [0, 1] [default: 1].
    #[arg(long)]
    pub visibility: Option<f64>,

    /// Standard deviation of plate-angle errors, degrees [default: 0].
    #[arg(long)]
    pub jitter_deg: Option<f64>,

    /// JSON file `{visibility, angle_jitter_deg, seed, shots}`; explicit flags win.
    #[arg(long)]
    pub noise: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Linear,
    Mle,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve one initial coin and print the position distribution.
    Simulate {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// POVM elements and Kraus operators induced by position readout.
    ExtractPovm {
        #[command(flatten)]
        schedule: ScheduleArg,
    },
    /// Wave-plate settings for every coin, and optionally a state preparation.
    Compile {
        #[command(flatten)]
        schedule: ScheduleArg,
        /// Also solve the preparation of this coin state from |H⟩.
        #[arg(long)]
        state: Option<String>,
    },
    /// Check a plate table against the coins of a schedule.
    VerifyTable {
        #[command(flatten)]
        schedule: ScheduleArg,
        /// Table JSON (list of {step, substep?, site, plates}); the built-in table when absent.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Simulate one noisy acquisition and write counts, error bars and a manifest.
    Sample {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Detected events per run [default: 32000].
        #[arg(long)]
        shots: Option<u64>,
        /// Bootstrap resamples for the error bars.
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
    /// Estimate the input coin state from a count record.
    Reconstruct {
        #[command(flatten)]
        schedule: ScheduleArg,
        /// Count record JSON as written by `sample`.
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Mle)]
        method: MethodArg,
    },
    /// simulate → sample → reconstruct, with a manifest.
    Pipeline {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Detected events per run [default: 32000].
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Mle)]
        method: MethodArg,
    },
    /// Run the acceptance checks against the embedded reference data; one
    /// PASS/FAIL line per criterion, JSON and CSV reports under --out-dir.
    VerifyPaper,
    /// Re-run a sampling run from its manifest and compare output digests.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Check(String),
    Runtime(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Check(_) | Failure::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "invalid input: {e:#}"),
            Failure::Check(msg) => write!(f, "verification failed: {msg}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

/// Marks an error as caused by user input (exit code 2).
pub trait InputContext<T> {
    fn input(self, what: &str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self, what: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into().context(what.to_string())))
    }
}

/// Marks an error as an internal failure (exit code 1).
pub trait RuntimeContext<T> {
    fn runtime(self, what: &str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> RuntimeContext<T> for Result<T, E> {
    fn runtime(self, what: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into().context(what.to_string())))
    }
}

/// Parses `argv`, recording whether the seed came from the flag or the environment.
pub fn parse<I, T>(argv: I) -> Result<(Cli, SeedSource), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = Cli::command().try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let source = match (cli.seed, matches.value_source("seed")) {
        (Some(s), Some(ValueSource::EnvVariable)) => SeedSource::Env(s),
        (Some(s), _) => SeedSource::Flag(s),
        (None, _) => SeedSource::Absent,
    };
    Ok((cli, source))
}

fn main() -> ExitCode {
    let (cli, seed) = match parse(std::env::args_os()) {
        Ok(parsed) => parsed,
        Err(e) => e.exit(),
    };
    match commands::run(&cli, seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("walkpovm: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
