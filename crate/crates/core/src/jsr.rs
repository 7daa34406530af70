//! Joint spectral radius `ϱ_∞ = lim max_{|w|=n} ‖A_w‖^{1/n}` and the
//! zero-temperature limit `e^{M(μ,s)/s} → ϱ_∞`.
//!
//! Lower bound: `(max_{|w|=nd} ‖A_w‖ / (d^{d+1} (max_{|w|=n} ‖A_w‖)^{d-1}))^{1/n}`.
//! An optional floor `max_{|w|=n} ρ(A_w)^{1/n}` uses the eigenvalue formula
//! for 2×2 words, the Gelfand iteration otherwise, and is reported separately.

use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_radius, Matrix};
use crate::measure::FiniteMatrixMeasure;
use crate::pressure::{estimate_m, PressureBracket, ROUNDING_SLACK};
use crate::words::{Engine, Kernel, LevelSums};

/// Word count above which the spectral floor is skipped.
pub const SPECTRAL_FLOOR_MAX_WORDS: u64 = 10_000;

/// Relative safety margin on spectral radii used as a floor. Covers the
/// `√ε` loss of the 2×2 formula near a double eigenvalue.
pub const SPECTRAL_FLOOR_MARGIN: f64 = 1e-7;

/// A non-empty set of matrices of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSet {
    measure: FiniteMatrixMeasure,
}

impl MatrixSet {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        Ok(Self {
            measure: FiniteMatrixMeasure::counting(matrices)?,
        })
    }

    /// The support of `μ`.
    pub fn support_of(mu: &FiniteMatrixMeasure) -> Self {
        Self {
            measure: FiniteMatrixMeasure::counting(mu.matrices().cloned()).expect("a measure has atoms"),
        }
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &Matrix> {
        self.measure.matrices()
    }
}

/// `max_{|w|=n} ‖A_w‖^{1/n}` and a word attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct JsrBound {
    pub value: f64,
    pub word: Vec<usize>,
}

fn max_norms(engine: &Engine, set: &MatrixSet, depth: usize) -> Result<LevelSums> {
    engine.level_sums(&set.measure, Kernel::Norm(1.0), depth)
}

pub fn jsr_upper(engine: &Engine, set: &MatrixSet, n: usize) -> Result<JsrBound> {
    let sums = max_norms(engine, set, n)?;
    Ok(JsrBound {
        value: (sums.max_log_norm(n) / n as f64).exp(),
        word: sums.argmax_word(n).to_vec(),
    })
}

fn bochi_from(sums: &LevelSums, d: usize, n: usize) -> f64 {
    let top = sums.max_log_norm(n * d);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    let c = (d as f64 + 1.0) * (d as f64).ln();
    ((top - c - (d as f64 - 1.0) * sums.max_log_norm(n)) / n as f64).exp()
}

pub fn jsr_lower_bochi(engine: &Engine, set: &MatrixSet, n: usize) -> Result<f64> {
    let d = set.dim();
    let sums = max_norms(engine, set, n * d)?;
    Ok(bochi_from(&sums, d, n))
}

/// `max_{|w|=n} ρ(A_w)^{1/n}`, shrunk by [`SPECTRAL_FLOOR_MARGIN`]; `None`
/// when there are more than [`SPECTRAL_FLOOR_MAX_WORDS`] words.
pub fn spectral_floor(set: &MatrixSet, n: usize) -> Option<f64> {
    let mats: Vec<&Matrix> = set.matrices().collect();
    let total = (mats.len() as u64).checked_pow(n as u32)?;
    if total > SPECTRAL_FLOOR_MAX_WORDS || n == 0 {
        return None;
    }
    let mut best = 0.0f64;
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let product = digits[1..]
            .iter()
            .fold(mats[digits[0]].clone(), |acc, &i| &acc * mats[i]);
        if let Ok(rho) = floor_radius(&product) {
            best = best.max(rho.powf(1.0 / n as f64));
        }
        for digit in digits.iter_mut() {
            *digit += 1;
            if *digit < mats.len() {
                break;
            }
            *digit = 0;
        }
    }
    Some(best * (1.0 - SPECTRAL_FLOOR_MARGIN))
}

fn floor_radius(a: &Matrix) -> Result<f64> {
    if a.dim() != 2 {
        return spectral_radius(a);
    }
    let half_trace = 0.5 * (a.get(0, 0) + a.get(1, 1));
    let det = a.determinant();
    let disc = half_trace * half_trace - det;
    Ok(if disc >= 0.0 {
        half_trace.abs() + disc.sqrt()
    } else {
        det.sqrt()
    })
}

/// `[lower, upper] ∋ ϱ_∞` on the linear scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JsrBracket {
    pub lower: f64,
    pub upper: f64,
    /// Best lower bound from the norm inequality alone.
    pub bochi: f64,
    /// Best Gelfand floor, `0` if never computed.
    pub spectral_floor: f64,
    pub n_used: usize,
    /// `true` when `upper − lower ≤ eps`.
    pub certified: bool,
}

impl JsrBracket {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Combines both bounds over `n = 1, 2, …` until `upper − lower ≤ eps` or the
/// budget runs out.
pub fn jsr_bracket(engine: &Engine, set: &MatrixSet, eps: f64, use_spectral_floor: bool) -> Result<JsrBracket> {
    if !(eps >= 0.0) {
        return invalid(format!("eps must be non-negative, got {eps}"));
    }
    let d = set.dim();
    let max_len = engine.budget().max_word_length;
    let mut out = JsrBracket {
        lower: 0.0,
        upper: f64::INFINITY,
        bochi: 0.0,
        spectral_floor: 0.0,
        n_used: 0,
        certified: false,
    };
    // depth grows geometrically so repeated passes cost at most twice the last
    let mut cache: Option<LevelSums> = None;
    for n in 1.. {
        let depth = (n * d).min(max_len);
        if cache.as_ref().is_none_or(|c| c.depth() < depth) {
            let grown = cache.as_ref().map_or(depth, |c| (2 * c.depth()).clamp(depth, max_len));
            let fetched = match max_norms(engine, set, grown) {
                Err(Error::BudgetExhausted { .. }) if grown > depth => max_norms(engine, set, depth),
                other => other,
            };
            match fetched {
                Ok(s) => cache = Some(s),
                Err(Error::BudgetExhausted { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        let sums = cache.as_ref().expect("computed above");
        for j in 1..=sums.depth() {
            out.upper = out.upper.min((sums.max_log_norm(j) / j as f64).exp());
        }
        if n * d > max_len {
            break;
        }
        for j in 1..=n {
            out.bochi = out.bochi.max(bochi_from(sums, d, j));
        }
        if use_spectral_floor {
            if let Some(f) = spectral_floor(set, n) {
                out.spectral_floor = out.spectral_floor.max(f);
            }
        }
        out.n_used = n;
        out.lower = out.bochi.max(out.spectral_floor).min(out.upper);
        if out.upper - out.lower <= eps {
            out.certified = true;
            break;
        }
    }
    out.lower = (out.lower * (1.0 - ROUNDING_SLACK)).min(out.upper);
    out.upper *= 1.0 + ROUNDING_SLACK;
    Ok(out)
}

/// `s = 1, 2, 4, …, 64`.
pub fn default_scan_grid() -> Vec<f64> {
    (0..7).map(|i| f64::from(1u32 << i)).collect()
}

/// One scanned exponent: the bracket on `M(μ,s)` and its image under
/// `x ↦ e^{x/s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub s: f64,
    pub bracket: PressureBracket,
    pub exp_lower: f64,
    pub exp_upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTemperatureScan {
    pub rows: Vec<ScanRow>,
    /// The bracket on `ϱ_∞` of the support.
    pub jsr: JsrBracket,
}

/// Brackets `e^{M(μ,s)/s}` along an increasing grid of exponents.
pub fn zero_temperature_scan(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    s_list: &[f64],
    eps: f64,
) -> Result<ZeroTemperatureScan> {
    if s_list.is_empty() {
        return invalid("the exponent grid is empty");
    }
    if s_list.iter().any(|&s| !(s > 0.0) || !s.is_finite()) || s_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("the exponent grid must be positive and strictly increasing");
    }
    let rows = s_list
        .iter()
        .map(|&s| {
            let bracket = estimate_m(engine, mu, s, eps)?;
            Ok(ScanRow {
                s,
                bracket,
                exp_lower: (bracket.lower / s).exp(),
                exp_upper: (bracket.upper / s).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let jsr = jsr_bracket(engine, &MatrixSet::support_of(mu), eps, true)?;
    Ok(ZeroTemperatureScan { rows, jsr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::WordBudget;
    use approx::assert_relative_eq;

    fn engine() -> Engine {
        Engine::new(WordBudget::default())
    }

    fn diag_pair() -> MatrixSet {
        MatrixSet::new(vec![Matrix::diag(&[0.5, 1.0 / 3.0]), Matrix::diag(&[0.25, 0.5])]).unwrap()
    }

    fn nilpotent() -> MatrixSet {
        MatrixSet::new(vec![Matrix::from_rows(&[[0.0, 2.0], [0.0, 0.0]]).unwrap()]).unwrap()
    }

    #[test]
    fn upper_examples() {
        let e = engine();
        let scalar = MatrixSet::new(vec![Matrix::scalar(3, 0.7)]).unwrap();
        assert_relative_eq!(jsr_upper(&e, &scalar, 4).unwrap().value, 0.7, max_relative = 1e-14);
        for n in 1..6 {
            assert_relative_eq!(jsr_upper(&e, &diag_pair(), n).unwrap().value, 0.5, max_relative = 1e-14);
        }
        let b = jsr_upper(&e, &nilpotent(), 1).unwrap();
        assert_relative_eq!(b.value, 2.0, max_relative = 1e-15);
        assert_eq!(b.word, vec![0]);
    }

    #[test]
    fn bochi_examples() {
        let e = engine();
        assert_eq!(jsr_lower_bochi(&e, &nilpotent(), 1).unwrap(), 0.0);
        let scalar = MatrixSet::new(vec![Matrix::scalar(2, 0.7)]).unwrap();
        assert_relative_eq!(
            jsr_lower_bochi(&e, &scalar, 1).unwrap(),
            0.7 / 8.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            jsr_lower_bochi(&e, &diag_pair(), 2).unwrap(),
            1.0 / (2.0 * 8f64.sqrt()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn bracket_examples() {
        let e = engine();
        let b = jsr_bracket(&e, &nilpotent(), 1e-12, true).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let b = jsr_bracket(&e, &diag_pair(), 1e-6, true).unwrap();
        assert!(b.contains(0.5) && b.certified);
        let a = Matrix::from_rows(&[[0.0, 1.0], [0.5, 0.0]]).unwrap();
        let b = jsr_bracket(&e, &MatrixSet::new(vec![a]).unwrap(), 1e-6, true).unwrap();
        assert!(b.contains(0.5f64.sqrt()), "{b:?}");
        let short = Engine::new(WordBudget::new(24, 1_000_000, std::time::Duration::from_secs(60)).unwrap());
        let b = jsr_bracket(&short, &diag_pair(), 1e-6, false).unwrap();
        assert!(b.contains(0.5) && b.spectral_floor == 0.0 && !b.certified);
        assert_eq!(b.n_used, 12);
    }

    #[test]
    fn spectral_floor_examples() {
        let f = spectral_floor(&diag_pair(), 3).unwrap();
        assert!(f <= 0.5 && f > 0.5 * (1.0 - 2.0 * SPECTRAL_FLOOR_MARGIN));
        let many = MatrixSet::new(vec![Matrix::identity(2); 20]).unwrap();
        assert!(spectral_floor(&many, 4).is_none());
    }

    #[test]
    fn scan_examples() {
        let e = engine();
        let mu = FiniteMatrixMeasure::counting([Matrix::scalar(2, 0.3)]).unwrap();
        let scan = zero_temperature_scan(&e, &mu, &[1.0, 3.0, 9.0], 0.5).unwrap();
        for row in &scan.rows {
            assert_relative_eq!(row.exp_upper, 0.3, max_relative = 1e-8);
        }
        assert!(scan.jsr.contains(0.3));
        assert!(zero_temperature_scan(&e, &mu, &[2.0, 1.0], 0.5).is_err());
        assert_eq!(default_scan_grid(), vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
    }
}
