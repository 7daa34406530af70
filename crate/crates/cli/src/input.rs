//! The measure file format:
//!
//! ```json
//! { "d": 2, "atoms": [ { "weight": 1.0, "matrix": [[0.5, 0.0], [0.0, 0.25]] } ] }
//! ```
//!
//! `weight` defaults to 1. Floats are written in shortest round-trip form,
//! so [`emit_measure`] followed by [`parse_measure`] is bit-exact.

use std::path::Path;

use mpress_core::{Atom, FiniteMatrixMeasure, Matrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    d: usize,
    atoms: Vec<AtomEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    #[serde(default = "unit_weight")]
    weight: f64,
    matrix: Vec<Vec<f64>>,
}

fn unit_weight() -> f64 {
    1.0
}

fn field_error(field: String, message: impl Into<String>) -> CliError {
    CliError::Input {
        location: field,
        message: message.into(),
    }
}

pub fn parse_measure(text: &str) -> Result<FiniteMatrixMeasure, CliError> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| CliError::Input {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let d = file.d;
    if d == 0 {
        return Err(field_error("d".into(), "dimension must be at least 1"));
    }
    if file.atoms.is_empty() {
        return Err(field_error("atoms".into(), "at least one atom is required"));
    }
    let mut atoms = Vec::with_capacity(file.atoms.len());
    for (i, entry) in file.atoms.into_iter().enumerate() {
        if !(entry.weight > 0.0) || !entry.weight.is_finite() {
            return Err(field_error(
                format!("atoms[{i}].weight"),
                format!("weight must be positive and finite, got {}", entry.weight),
            ));
        }
        if entry.matrix.len() != d {
            return Err(field_error(
                format!("atoms[{i}].matrix"),
                format!("expected {d} rows, found {}", entry.matrix.len()),
            ));
        }
        for (r, row) in entry.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(field_error(
                    format!("atoms[{i}].matrix[{r}]"),
                    format!("expected {d} entries, found {}", row.len()),
                ));
            }
        }
        let matrix =
            Matrix::from_rows(&entry.matrix).map_err(|e| field_error(format!("atoms[{i}].matrix"), e.to_string()))?;
        atoms.push(Atom::new(entry.weight, matrix));
    }
    FiniteMatrixMeasure::new(atoms).map_err(|e| field_error("atoms".into(), e.to_string()))
}

pub fn read_measure(path: &Path) -> Result<FiniteMatrixMeasure, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_measure(&text)
}

pub fn emit_measure(mu: &FiniteMatrixMeasure) -> String {
    let file = MeasureFile {
        d: mu.dim(),
        atoms: mu
            .atoms()
            .iter()
            .map(|a| AtomEntry {
                weight: a.weight,
                matrix: a.matrix.rows(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("finite floats always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG_PAIR: &str = r#"{"d": 2, "atoms": [
        {"weight": 1, "matrix": [[0.5, 0], [0, 0.3333333333333333]]},
        {"matrix": [[0.25, 0], [0, 0.5]]}
    ]}"#;

    #[test]
    fn parses_and_defaults_weight() {
        let mu = parse_measure(DIAG_PAIR).unwrap();
        assert_eq!(mu.dim(), 2);
        assert_eq!(mu.len(), 2);
        assert!(mu.has_unit_weights());
    }

    #[test]
    fn rejects_bad_weights() {
        for w in ["0", "-1"] {
            let text = format!(r#"{{"d": 1, "atoms": [{{"weight": {w}, "matrix": [[1]]}}]}}"#);
            let err = parse_measure(&text).unwrap_err().to_string();
            assert!(err.contains("atoms[0].weight"), "{err}");
        }
    }

    #[test]
    fn reports_field_paths_and_lines() {
        let ragged = r#"{"d": 2, "atoms": [{"matrix": [[1, 0], [0, 1]]}, {"matrix": [[1, 0], [0]]}]}"#;
        assert!(parse_measure(ragged)
            .unwrap_err()
            .to_string()
            .contains("atoms[1].matrix[1]"));
        let short = r#"{"d": 3, "atoms": [{"matrix": [[1, 0], [0, 1]]}]}"#;
        assert!(parse_measure(short)
            .unwrap_err()
            .to_string()
            .contains("expected 3 rows"));
        let broken = "{\"d\": 2,\n \"atoms\": [\n oops ]}";
        assert!(parse_measure(broken).unwrap_err().to_string().contains("line 3"));
        let unknown = r#"{"d": 1, "atoms": [{"matrix": [[1]], "wieght": 2}]}"#;
        assert!(parse_measure(unknown).is_err());
        assert!(parse_measure(r#"{"d": 1, "atoms": []}"#).is_err());
    }

    #[test]
    fn emit_round_trips() {
        let mu = parse_measure(DIAG_PAIR).unwrap();
        let again = parse_measure(&emit_measure(&mu)).unwrap();
        assert_eq!(mu, again);
    }
}
