use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpress_core::{Rational, WordBudget};

use crate::{CliError, Command, Exponent, JobSpec};

#[derive(Debug, Parser)]
#[command(
    name = "mpress",
    version,
    about = "Certified brackets for matrix pressures and related quantities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Bracket the norm pressure M(μ,s).
    Pressure {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        s: f64,
    },
    /// Bracket the p-radius of a unit-weight measure.
    Pradius {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        p: f64,
    },
    /// Bracket the singular value pressure P(μ,s); s may be "3/2" or "1+1/2".
    Svpressure {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        s: Exponent,
    },
    /// Bracket the affinity dimension.
    Affdim {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bracket the joint spectral radius of the support.
    Jsr {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip the eigenvalue floor and report the norm bound alone.
        #[arg(long)]
        no_spectral_floor: bool,
    },
    /// Bracket e^{M(μ,s)/s} along a grid of exponents.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated increasing exponents; defaults to 1,2,4,…,64.
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Measure file in the JSON format described in the README.
    pub input: PathBuf,
    /// Target bracket width.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Longest word evaluated.
    #[arg(long, default_value_t = 256)]
    pub max_n: usize,
    /// Products allowed per enumeration.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_words: u64,
    /// Wall-clock cap in seconds.
    #[arg(long, default_value_t = 120.0)]
    pub time_limit: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest denominator used for rational exponents.
    #[arg(long, default_value_t = 6)]
    pub q_cap: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

impl FromStr for Exponent {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        if text.contains('/') || text.contains('+') {
            text.parse::<Rational>()
                .map(Exponent::Rational)
                .map_err(|e| e.to_string())
        } else {
            text.trim()
                .parse::<f64>()
                .map(Exponent::Real)
                .map_err(|e| format!("{text:?}: {e}"))
        }
    }
}

impl CommandArgs {
    pub fn into_job(self) -> Result<JobSpec, CliError> {
        let (common, command) = match self {
            CommandArgs::Pressure { common, s } => (common, Command::Pressure { s }),
            CommandArgs::Pradius { common, p } => (common, Command::PRadius { p }),
            CommandArgs::Svpressure { common, s } => (common, Command::SvPressure { s }),
            CommandArgs::Affdim { common } => (common, Command::AffDim),
            CommandArgs::Jsr {
                common,
                no_spectral_floor,
            } => (
                common,
                Command::Jsr {
                    spectral_floor: !no_spectral_floor,
                },
            ),
            CommandArgs::Scan { common, s } => (common, Command::Scan { grid: s }),
        };
        if !(common.time_limit > 0.0) || !common.time_limit.is_finite() {
            return Err(CliError::Usage(format!(
                "--time-limit must be positive, got {}",
                common.time_limit
            )));
        }
        if common.q_cap == 0 {
            return Err(CliError::Usage("--q-cap must be at least 1".into()));
        }
        if common.workers == Some(0) {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        let budget = WordBudget::new(
            common.max_n,
            common.max_words,
            Duration::from_secs_f64(common.time_limit),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        let job = JobSpec {
            command,
            input: common.input,
            eps: common.eps,
            budget,
            workers: common.workers,
            format: common.format,
            q_cap: common.q_cap,
        };
        job.validate()?;
        Ok(job)
    }
}
