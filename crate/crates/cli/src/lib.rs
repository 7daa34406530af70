//! File-driven frontend for `mpress-core`: reads a measure, runs one
//! computation under a budget, and renders the bracket as text, JSON or CSV.
//!
//! Exit codes: 0 when the bracket is certified (or the value is exactly
//! `-∞`), 2 when the budget ran out first, 1 on invalid input.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod input;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use mpress_core::affinity::{affinity_dimension, AffinityBranch, AffinityOptions};
use mpress_core::jsr::{default_scan_grid, jsr_bracket, zero_temperature_scan, JsrBracket, MatrixSet};
use mpress_core::svpressure::{discontinuity_check_2d, estimate_p, estimate_p_rational, LiftLimits};
use mpress_core::{estimate_m, p_radius, Engine, FiniteMatrixMeasure, Rational, Status, WordBudget};
use thiserror::Error;

pub use args::{Cli, CommandArgs, Format};
pub use input::{emit_measure, parse_measure, read_measure};
pub use report::Report;
use report::{
    provenance, status_name, BracketRecord, ContinuityRecord, JsrRecord, Num, Outcome, Parameters, ScanRecord,
};

pub const EXIT_CERTIFIED: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{location}: {message}")]
    Input { location: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] mpress_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(mpress_core::Error::BudgetExhausted { .. })
            | CliError::Library(mpress_core::Error::DimensionCapExceeded { .. }) => EXIT_BUDGET,
            _ => EXIT_INVALID,
        }
    }
}

/// An exponent given either as a decimal or as an exact rational.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Real(f64),
    Rational(Rational),
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Real(x) => x,
            Exponent::Rational(r) => r.to_f64(),
        }
    }

    fn label(self) -> String {
        match self {
            Exponent::Real(x) => x.to_string(),
            Exponent::Rational(r) => r.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Pressure { s: f64 },
    PRadius { p: f64 },
    SvPressure { s: Exponent },
    AffDim,
    Jsr { spectral_floor: bool },
    Scan { grid: Vec<f64> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pressure { .. } => "pressure",
            Command::PRadius { .. } => "pradius",
            Command::SvPressure { .. } => "svpressure",
            Command::AffDim => "affdim",
            Command::Jsr { .. } => "jsr",
            Command::Scan { .. } => "scan",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub input: PathBuf,
    pub eps: f64,
    pub budget: WordBudget,
    /// `None` uses the engine default.
    pub workers: Option<usize>,
    pub format: Format,
    pub q_cap: u64,
}

impl JobSpec {
    /// Checks command-specific parameters before any file is read.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return usage(format!("--eps must be positive and finite, got {}", self.eps));
        }
        match &self.command {
            Command::Pressure { s } if !(*s > 0.0) || !s.is_finite() => usage(format!("--s must be positive, got {s}")),
            Command::SvPressure { s } if !(s.value() > 0.0) || !s.value().is_finite() => {
                usage(format!("--s must be positive, got {}", s.label()))
            }
            Command::PRadius { p } if !(*p >= 1.0) || !p.is_finite() => {
                usage(format!("--p must be at least 1, got {p}"))
            }
            Command::Scan { grid }
                if grid.iter().any(|&s| !(s > 0.0) || !s.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) =>
            {
                usage("--s grid must be positive and strictly increasing".into())
            }
            _ => Ok(()),
        }
    }

    fn parameters(&self, workers: usize) -> Parameters {
        let (s, p, grid) = match &self.command {
            Command::Pressure { s } => (Some(s.to_string()), None, Vec::new()),
            Command::SvPressure { s } => (Some(s.label()), None, Vec::new()),
            Command::PRadius { p } => (None, Some(*p), Vec::new()),
            Command::Scan { grid } => (None, None, scan_grid(grid)),
            Command::AffDim | Command::Jsr { .. } => (None, None, Vec::new()),
        };
        Parameters {
            s,
            p,
            grid,
            eps: self.eps,
            max_n: self.budget.max_word_length,
            max_words: self.budget.max_words,
            time_limit_seconds: self.budget.wall_clock_cap.as_secs_f64(),
            workers,
            q_cap: self.q_cap,
        }
    }
}

fn scan_grid(grid: &[f64]) -> Vec<f64> {
    if grid.is_empty() {
        default_scan_grid()
    } else {
        grid.to_vec()
    }
}

/// A finished run: the report and the process exit code it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub report: Report,
    pub exit_code: u8,
}

impl RunOutcome {
    /// Scan in text mode renders as pure CSV.
    pub fn render(&self, format: Format) -> String {
        match (format, &self.report.result) {
            (Format::Json, _) => self.report.to_json() + "\n",
            (Format::Text, Outcome::Scan { .. }) => self.report.to_csv(),
            (Format::Text, _) => self.report.to_text(),
        }
    }
}

fn exit_for(status: Status) -> u8 {
    match status {
        Status::Certified | Status::MinusInfinity => EXIT_CERTIFIED,
        Status::BudgetExhausted => EXIT_BUDGET,
    }
}

fn jsr_record(j: &JsrBracket) -> JsrRecord {
    JsrRecord {
        lower: Num(j.lower),
        upper: Num(j.upper),
        norm_lower: Num(j.bochi),
        spectral_floor: Num(j.spectral_floor),
        n_used: j.n_used,
        status: if j.certified { "certified" } else { "budget_exhausted" }.into(),
    }
}

const SPECTRAL_FLOOR_NOTE: &str =
    "the floor max rho(A_w)^{1/n} is standard spectral theory, separate from the norm lower bound";

/// Reads the input file, runs the job and assembles the report.
pub fn run(job: &JobSpec) -> Result<RunOutcome, CliError> {
    job.validate()?;
    let mu = read_measure(&job.input)?;
    run_on(job, &mu)
}

/// [`run`] on an already parsed measure.
pub fn run_on(job: &JobSpec, mu: &FiniteMatrixMeasure) -> Result<RunOutcome, CliError> {
    job.validate()?;
    let started = Instant::now();
    let mut engine = Engine::new(job.budget);
    if let Some(w) = job.workers {
        engine = engine.with_workers(w);
    }
    let limits = LiftLimits {
        q_cap: job.q_cap,
        ..LiftLimits::default()
    };
    let mut notes = Vec::new();
    let (result, status) = match &job.command {
        Command::Pressure { s } => {
            let b = estimate_m(&engine, mu, *s, job.eps)?;
            notes.extend(provenance(b.source).map(String::from));
            let bracket = BracketRecord::new("M(mu,s)", &b);
            (
                Outcome::Bracket {
                    bracket,
                    continuity: None,
                },
                b.status,
            )
        }
        Command::PRadius { p } => {
            let b = p_radius(&engine, mu, *p, job.eps)?;
            notes.extend(provenance(b.source).map(String::from));
            notes.push("rho_p = N^{-1/p} e^{M(mu,p)/p} with N unit-weight atoms".into());
            (
                Outcome::Bracket {
                    bracket: BracketRecord::new("rho_p", &b),
                    continuity: None,
                },
                b.status,
            )
        }
        Command::SvPressure { s } => {
            let b = match s {
                Exponent::Real(x) => estimate_p(&engine, mu, *x, job.eps, limits)?,
                Exponent::Rational(r) => estimate_p_rational(&engine, mu, *r, job.eps, limits)?,
            };
            notes.extend(provenance(b.source).map(String::from));
            let continuity = if mu.dim() == 2 && s.value() == 1.0 {
                let c = discontinuity_check_2d(&engine, mu, job.eps)?;
                notes.push("continuity compares P(mu,1) with P of the invertible part".into());
                Some(Box::new(ContinuityRecord {
                    verdict: c.verdict.as_str().into(),
                    full: c.full.as_ref().map(|b| BracketRecord::new("P(mu,1)", b)),
                    invertible: c.invertible.as_ref().map(|b| BracketRecord::new("P(mu0,1)", b)),
                }))
            } else {
                None
            };
            (
                Outcome::Bracket {
                    bracket: BracketRecord::new("P(mu,s)", &b),
                    continuity,
                },
                b.status,
            )
        }
        Command::AffDim => {
            let opts = AffinityOptions {
                limits,
                snap_denominator: job.q_cap,
            };
            let r = affinity_dimension(&engine, mu, job.eps, opts)?;
            let branch = match r.branch {
                AffinityBranch::Determinant => {
                    notes.push("solved sum_i w_i |det A_i|^{s/d} = 1 because the dimension is at least d".into());
                    "determinant"
                }
                AffinityBranch::Trisection => "trisection",
            };
            (
                Outcome::Affinity {
                    lower: r.lo,
                    upper: r.hi,
                    branch: branch.into(),
                    steps: r.steps,
                    history: r.history.iter().map(|&(a, b)| [a, b]).collect(),
                },
                r.status,
            )
        }
        Command::Jsr { spectral_floor } => {
            let j = jsr_bracket(&engine, &MatrixSet::support_of(mu), job.eps, *spectral_floor)?;
            if *spectral_floor {
                notes.push(SPECTRAL_FLOOR_NOTE.into());
            }
            let status = if j.certified {
                Status::Certified
            } else {
                Status::BudgetExhausted
            };
            (Outcome::Jsr(jsr_record(&j)), status)
        }
        Command::Scan { grid } => {
            let scan = zero_temperature_scan(&engine, mu, &scan_grid(grid), job.eps)?;
            notes.push(SPECTRAL_FLOOR_NOTE.into());
            let rows: Vec<ScanRecord> = scan
                .rows
                .iter()
                .map(|r| ScanRecord {
                    s: r.s,
                    lower: Num(r.bracket.lower),
                    upper: Num(r.bracket.upper),
                    exp_lower: Num(r.exp_lower),
                    exp_upper: Num(r.exp_upper),
                    status: status_name(r.bracket.status),
                })
                .collect();
            let all_done = scan.rows.iter().all(|r| r.bracket.status != Status::BudgetExhausted);
            let status = if all_done && scan.jsr.certified {
                Status::Certified
            } else {
                Status::BudgetExhausted
            };
            (
                Outcome::Scan {
                    rows,
                    jsr: jsr_record(&scan.jsr),
                },
                status,
            )
        }
    };
    let report = Report {
        command: job.command.name().into(),
        input: job.input.display().to_string(),
        dimension: mu.dim(),
        atoms: mu.len(),
        parameters: job.parameters(engine.workers()),
        status: status_name(status),
        result,
        words_evaluated: engine.products_formed(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        notes,
    };
    Ok(RunOutcome {
        report,
        exit_code: exit_for(status),
    })
}
