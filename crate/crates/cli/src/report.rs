use std::fmt::Write as _;

use mpress_core::{LowerBoundSource, PressureBracket, Status};
use serde::{Serialize, Serializer};

/// A float that serializes infinities as the strings `"inf"` and `"-inf"`,
/// which plain JSON cannot carry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else {
            serializer.serialize_str(&self.0.to_string())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    pub eps: f64,
    pub max_n: usize,
    pub max_words: u64,
    pub time_limit_seconds: f64,
    pub workers: usize,
    pub q_cap: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketRecord {
    /// What the interval encloses, e.g. `"M(mu,s)"`.
    pub quantity: String,
    pub lower: Num,
    pub upper: Num,
    pub status: String,
    pub n_used: usize,
    pub source: String,
}

impl BracketRecord {
    pub fn new(quantity: &str, b: &PressureBracket) -> Self {
        Self {
            quantity: quantity.into(),
            lower: Num(b.lower),
            upper: Num(b.upper),
            status: b.status.as_str().into(),
            n_used: b.n_used,
            source: b.source.as_str().into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JsrRecord {
    pub lower: Num,
    pub upper: Num,
    pub norm_lower: Num,
    pub spectral_floor: Num,
    pub n_used: usize,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub s: f64,
    pub lower: Num,
    pub upper: Num,
    pub exp_lower: Num,
    pub exp_upper: Num,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityRecord {
    pub verdict: String,
    pub full: Option<BracketRecord>,
    pub invertible: Option<BracketRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Bracket {
        bracket: BracketRecord,
        #[serde(skip_serializing_if = "Option::is_none")]
        continuity: Option<Box<ContinuityRecord>>,
    },
    Affinity {
        lower: f64,
        upper: f64,
        branch: String,
        steps: usize,
        history: Vec<[f64; 2]>,
    },
    Jsr(JsrRecord),
    Scan {
        rows: Vec<ScanRecord>,
        jsr: JsrRecord,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub dimension: usize,
    pub atoms: usize,
    pub parameters: Parameters,
    pub status: String,
    pub result: Outcome,
    pub words_evaluated: u64,
    pub wall_time_seconds: f64,
    pub notes: Vec<String>,
}

pub fn provenance(source: LowerBoundSource) -> Option<&'static str> {
    match source {
        LowerBoundSource::NormConstant => Some("lower bound from S_{nd} <= K_{d,s} e^{nM} S_n^{d-1} on norm sums"),
        LowerBoundSource::PlanarConstant => {
            Some("lower bound from the planar inequality Phi_{2n} <= K~_s e^{nP} Phi_n")
        }
        LowerBoundSource::LiftConstant => Some("lower bound from the exterior-tensor lift at a rational exponent"),
        LowerBoundSource::Determinant => Some("exact value from multiplicativity of |det|"),
        LowerBoundSource::None => None,
    }
}

pub fn status_name(status: Status) -> String {
    status.as_str().into()
}

fn bracket_lines(out: &mut String, prefix: &str, b: &BracketRecord) {
    let _ = writeln!(out, "{prefix}{}: [{}, {}]", b.quantity, b.lower.0, b.upper.0);
    let _ = writeln!(
        out,
        "{prefix}  status: {}, n_used: {}, source: {}",
        b.status, b.n_used, b.source
    );
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields always serialize")
    }

    /// Human-readable summary; every float is printed in shortest
    /// round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} on {} (d = {}, {} atoms)",
            self.command, self.input, self.dimension, self.atoms
        );
        match &self.result {
            Outcome::Bracket { bracket, continuity } => {
                bracket_lines(&mut out, "", bracket);
                if let Some(c) = continuity {
                    let _ = writeln!(out, "continuity at s = 1: {}", c.verdict);
                    for b in [&c.full, &c.invertible].into_iter().flatten() {
                        bracket_lines(&mut out, "  ", b);
                    }
                }
            }
            Outcome::Affinity {
                lower,
                upper,
                branch,
                steps,
                ..
            } => {
                let _ = writeln!(out, "affinity dimension: [{lower}, {upper}]");
                let _ = writeln!(out, "  branch: {branch}, steps: {steps}");
            }
            Outcome::Jsr(j) => jsr_lines(&mut out, j),
            Outcome::Scan { .. } => out.push_str(&self.to_csv()),
        }
        let _ = writeln!(out, "status: {}", self.status);
        let _ = writeln!(out, "words evaluated: {}", self.words_evaluated);
        let _ = writeln!(out, "wall time: {:.3} s", self.wall_time_seconds);
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    /// Scan rows as CSV; empty for other commands.
    pub fn to_csv(&self) -> String {
        let Outcome::Scan { rows, .. } = &self.result else {
            return String::new();
        };
        let mut out = String::from("s,lower,upper,exp_lower,exp_upper,status\n");
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.s, r.lower.0, r.upper.0, r.exp_lower.0, r.exp_upper.0, r.status
            );
        }
        out
    }
}

fn jsr_lines(out: &mut String, j: &JsrRecord) {
    let _ = writeln!(out, "joint spectral radius: [{}, {}]", j.lower.0, j.upper.0);
    let _ = writeln!(
        out,
        "  norm lower bound: {}, spectral floor: {}, n_used: {}",
        j.norm_lower.0, j.spectral_floor.0, j.n_used
    );
}
