//! Norm pressure `M(μ,s) = lim (1/n) ln ∫‖A‖^s dμₙ` and the p-radius.
//!
//! Upper bounds come from subadditivity, `Uₙ = (1/n) ln Sₙ`. Lower bounds
//! come from the a priori inequality
//! `S_{nd} ≤ K_{d,s} e^{n M} Sₙ^{d-1}`, i.e.
//! `Lₙ = (1/n)[ln S_{nd} − ln K_{d,s} − (d−1) ln Sₙ]`.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::measure::FiniteMatrixMeasure;
use crate::words::{Engine, Kernel, LevelSums};

/// Relative widening applied to every reported endpoint to absorb rounding.
pub const ROUNDING_SLACK: f64 = 1e-9;

/// Outcome of a bracketing run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Certified,
    MinusInfinity,
    BudgetExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::MinusInfinity => "minus_infinity",
            Status::BudgetExhausted => "budget_exhausted",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which inequality produced a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBoundSource {
    /// `S_{nd} ≤ K_{d,s} e^{nM} Sₙ^{d-1}` on norm sums.
    NormConstant,
    /// The planar inequality `Φ_{2n} ≤ K̃_s e^{nP} Φₙ`.
    PlanarConstant,
    /// The lifted inequality `Φ_{nd′} ≤ K e^{nP} Φₙ^{d′-1}` for rational `s`.
    LiftConstant,
    /// Exact value from multiplicativity of `|det|`.
    Determinant,
    /// No lower bound was computed.
    None,
}

impl LowerBoundSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LowerBoundSource::NormConstant => "norm-constant",
            LowerBoundSource::PlanarConstant => "planar-constant",
            LowerBoundSource::LiftConstant => "lift-constant",
            LowerBoundSource::Determinant => "determinant",
            LowerBoundSource::None => "none",
        }
    }
}

impl fmt::Display for LowerBoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[lower, upper]` containing a pressure value.
///
/// `n_used` is the largest `n` whose lower bound was evaluated; `products`
/// counts matrix products formed while computing the bracket.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureBracket {
    pub lower: f64,
    pub upper: f64,
    pub n_used: usize,
    pub status: Status,
    pub source: LowerBoundSource,
    pub products: u64,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        if self.lower == self.upper {
            0.0
        } else {
            self.upper - self.lower
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Applies a non-decreasing map to both endpoints.
    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            lower: f(self.lower),
            upper: f(self.upper),
            ..self
        }
    }

    pub(crate) fn minus_infinity(n_used: usize, products: u64) -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::NEG_INFINITY,
            n_used,
            status: Status::MinusInfinity,
            source: LowerBoundSource::None,
            products,
        }
    }
}

pub(crate) fn widen_down(x: f64) -> f64 {
    if x.is_finite() {
        x - ROUNDING_SLACK * (1.0 + x.abs())
    } else {
        x
    }
}

pub(crate) fn widen_up(x: f64) -> f64 {
    if x.is_finite() {
        x + ROUNDING_SLACK * (1.0 + x.abs())
    } else {
        x
    }
}

/// `K_{d,s} = d^{2+(d+1)s} · max{d^{1-s}, 1}`.
pub fn norm_constant(d: usize, s: f64) -> f64 {
    log_norm_constant(d, s).exp()
}

pub fn log_norm_constant(d: usize, s: f64) -> f64 {
    let ld = (d as f64).ln();
    (2.0 + (d as f64 + 1.0) * s) * ld + ((1.0 - s) * ld).max(0.0)
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return invalid(format!("exponent s must be positive and finite, got {s}"));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || eps.is_nan() {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    Ok(())
}

/// `Uₙ = (1/n) ln Sₙ`.
pub fn upper_m(engine: &Engine, mu: &FiniteMatrixMeasure, s: f64, n: usize) -> Result<f64> {
    check_exponent(s)?;
    Ok(engine.weighted_power_sum(mu, n, Kernel::Norm(s))?.ln() / n as f64)
}

/// `Lₙ = (1/n)[ln S_{nd} − ln K_{d,s} − (d−1) ln Sₙ]`.
pub fn lower_m(engine: &Engine, mu: &FiniteMatrixMeasure, s: f64, n: usize) -> Result<f64> {
    check_exponent(s)?;
    let d = mu.dim();
    let sums = engine.level_sums(mu, Kernel::Norm(s), n * d)?;
    Ok(lower_from_sums(&sums, n, d, log_norm_constant(d, s)))
}

/// `(1/n)[ln S_{mn} − ln K − (m−1) ln Sₙ]`; `-∞` when `S_{mn} = 0`.
pub(crate) fn lower_from_sums(sums: &LevelSums, n: usize, m: usize, ln_k: f64) -> f64 {
    let top = sums.sum(m * n);
    if top.is_zero() {
        return f64::NEG_INFINITY;
    }
    let base = if m > 1 { (m - 1) as f64 * sums.sum(n).ln() } else { 0.0 };
    (top.ln() - ln_k - base) / n as f64
}

/// Result of the test `∫‖A‖^s dμ_d = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroProbe {
    pub minus_infinity: bool,
    /// Products of length `d` formed by the test.
    pub products: u64,
    /// Largest `‖A_w‖` over words of length `d`.
    pub max_norm: f64,
}

/// `M(μ,s) = −∞` exactly when every product of length `d` vanishes.
pub fn detect_minus_infinity(engine: &Engine, mu: &FiniteMatrixMeasure) -> Result<ZeroProbe> {
    let d = mu.dim();
    let sums = engine.level_sums(mu, Kernel::Norm(1.0), d)?;
    Ok(ZeroProbe {
        minus_infinity: sums.sum(d).is_zero(),
        products: sums.products(d),
        max_norm: sums.max_log_norm(d).exp(),
    })
}

/// A pairing of upper and lower bounds driven by one bracketing loop.
///
/// The lower bound at word length `n` is
/// `(1/n)[ln F_{mn} − ln_k − (m−1) ln Fₙ]` on sums of `lower_kernel`; the
/// upper bound at every level `j` is `(1/j) ln G_j` on sums of
/// `upper_kernel`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Route {
    pub upper_kernel: Kernel,
    pub lower_kernel: Kernel,
    pub multiplier: usize,
    pub ln_k: f64,
    pub source: LowerBoundSource,
}

/// Level sums held across iterations; the depth grows geometrically so the
/// total work stays proportional to the final depth.
struct CachedSums {
    depth: usize,
    lower: LevelSums,
    upper: Option<LevelSums>,
}

impl CachedSums {
    fn compute(engine: &Engine, mu: &FiniteMatrixMeasure, route: &Route, depth: usize) -> Result<Self> {
        let lower = engine.level_sums(mu, route.lower_kernel, depth)?;
        let upper = if route.upper_kernel == route.lower_kernel {
            None
        } else {
            Some(engine.level_sums(mu, route.upper_kernel, depth)?)
        };
        Ok(Self { depth, lower, upper })
    }
}

/// Iterates `n = 1, 2, …` until the widened running bracket has width at
/// most `eps` or the budget runs out.
pub(crate) fn run_bracket(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    route: Route,
    eps: f64,
) -> Result<PressureBracket> {
    let m = route.multiplier;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut n_used = 0;
    let start = engine.products_formed();
    let mut status = Status::BudgetExhausted;
    let max_len = engine.budget().max_word_length;
    let mut cache: Option<CachedSums> = None;
    for n in 1.. {
        let full = m * n;
        // past the length cap, one last pass at the cap still tightens the upper bound
        let depth = full.min(max_len);
        if cache.as_ref().is_none_or(|c| c.depth < depth) {
            let grown = cache.as_ref().map_or(depth, |c| (2 * c.depth).clamp(depth, max_len));
            match CachedSums::compute(engine, mu, &route, grown) {
                Ok(c) => cache = Some(c),
                Err(Error::BudgetExhausted { .. }) if grown > depth => {
                    match CachedSums::compute(engine, mu, &route, depth) {
                        Ok(c) => cache = Some(c),
                        Err(Error::BudgetExhausted { .. }) => break,
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::BudgetExhausted { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        let c = cache.as_ref().expect("computed above");
        let lower_sums = &c.lower;
        let up = c.upper.as_ref().unwrap_or(lower_sums);
        for j in 1..=c.depth {
            upper = upper.min(up.sum(j).ln() / j as f64);
        }
        if upper == f64::NEG_INFINITY {
            status = Status::MinusInfinity;
            break;
        }
        if full > max_len {
            break;
        }
        for j in 1..=n {
            lower = lower.max(lower_from_sums(lower_sums, j, m, route.ln_k));
        }
        n_used = n;
        if widen_up(upper) - widen_down(lower) <= eps {
            status = Status::Certified;
            break;
        }
    }
    if status == Status::MinusInfinity {
        return Ok(PressureBracket::minus_infinity(
            n_used.max(1),
            engine.products_formed() - start,
        ));
    }
    // the lower bound is never allowed above the upper one
    let lower = widen_down(lower.min(upper));
    Ok(PressureBracket {
        lower,
        upper: widen_up(upper),
        n_used,
        status,
        source: if n_used == 0 {
            LowerBoundSource::None
        } else {
            route.source
        },
        products: engine.products_formed() - start,
    })
}

/// Certified bracket on `M(μ,s)` of width at most `eps`, or the best bracket
/// found before the budget ran out.
pub fn estimate_m(engine: &Engine, mu: &FiniteMatrixMeasure, s: f64, eps: f64) -> Result<PressureBracket> {
    check_exponent(s)?;
    check_eps(eps)?;
    let d = mu.dim();
    let start = engine.products_formed();
    match detect_minus_infinity(engine, mu) {
        Ok(probe) if probe.minus_infinity => {
            return Ok(PressureBracket::minus_infinity(1, probe.products));
        }
        Ok(_) => {}
        Err(Error::BudgetExhausted { .. }) => {
            return Ok(PressureBracket {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                n_used: 0,
                status: Status::BudgetExhausted,
                source: LowerBoundSource::None,
                products: engine.products_formed() - start,
            })
        }
        Err(e) => return Err(e),
    }
    let kernel = Kernel::Norm(s);
    let route = Route {
        upper_kernel: kernel,
        lower_kernel: kernel,
        multiplier: d,
        ln_k: log_norm_constant(d, s),
        source: LowerBoundSource::NormConstant,
    };
    let mut bracket = run_bracket(engine, mu, route, eps)?;
    bracket.products = engine.products_formed() - start;
    Ok(bracket)
}

/// Bracket on `ϱ_p = N^{-1/p} e^{M(μ,p)/p}` for `N` unit-weight atoms.
pub fn p_radius(engine: &Engine, mu: &FiniteMatrixMeasure, p: f64, eps: f64) -> Result<PressureBracket> {
    if !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("p must be at least 1, got {p}"));
    }
    if !mu.has_unit_weights() {
        return invalid("the p-radius needs unit weights on every atom");
    }
    let ln_n = (mu.len() as f64).ln();
    let bracket = estimate_m(engine, mu, p, eps)?;
    Ok(bracket.map(|x| ((x - ln_n) / p).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::words::WordBudget;
    use approx::assert_relative_eq;

    fn engine() -> Engine {
        Engine::new(WordBudget::default())
    }

    fn diag_pair() -> FiniteMatrixMeasure {
        FiniteMatrixMeasure::counting([Matrix::diag(&[0.5, 1.0 / 3.0]), Matrix::diag(&[0.25, 0.5])]).unwrap()
    }

    fn nilpotent_pair() -> FiniteMatrixMeasure {
        FiniteMatrixMeasure::counting([
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
            Matrix::from_rows(&[[0.0, 2.0], [0.0, 0.0]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn norm_constant_examples() {
        assert_relative_eq!(norm_constant(2, 1.0), 32.0, max_relative = 1e-14);
        assert_relative_eq!(norm_constant(2, 0.5), 16.0, max_relative = 1e-14);
        assert_relative_eq!(norm_constant(3, 2.0), 59049.0, max_relative = 1e-14);
        assert_eq!(norm_constant(1, 3.0), 1.0);
    }

    #[test]
    fn upper_examples() {
        let e = engine();
        let mu = diag_pair();
        assert_relative_eq!(upper_m(&e, &mu, 1.0, 1).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            upper_m(&e, &mu, 1.0, 2).unwrap(),
            0.5 * (5.0f64 / 6.0).ln(),
            max_relative = 1e-14
        );
        let scalar = FiniteMatrixMeasure::counting([Matrix::scalar(2, 0.3)]).unwrap();
        for n in 1..5 {
            assert_relative_eq!(
                upper_m(&e, &scalar, 2.5, n).unwrap(),
                2.5 * 0.3f64.ln(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn lower_examples() {
        let e = engine();
        assert_relative_eq!(
            lower_m(&e, &diag_pair(), 1.0, 1).unwrap(),
            (5.0f64 / 6.0 / 32.0).ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(lower_m(&e, &diag_pair(), 1.0, 1).unwrap(), -3.6481, epsilon = 1e-4);
        let scalar = FiniteMatrixMeasure::counting([Matrix::scalar(3, 0.3)]).unwrap();
        assert_relative_eq!(
            lower_m(&e, &scalar, 0.7, 1).unwrap(),
            0.7 * 0.3f64.ln() - log_norm_constant(3, 0.7),
            max_relative = 1e-13
        );
        assert_eq!(lower_m(&e, &nilpotent_pair(), 1.0, 1).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn minus_infinity_detection() {
        let e = engine();
        let probe = detect_minus_infinity(&e, &nilpotent_pair()).unwrap();
        assert!(probe.minus_infinity);
        assert_eq!(probe.products, 4);
        assert_eq!(probe.max_norm, 0.0);
        let with_identity = FiniteMatrixMeasure::counting([
            Matrix::identity(2),
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
        ])
        .unwrap();
        assert!(!detect_minus_infinity(&e, &with_identity).unwrap().minus_infinity);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let rotation = FiniteMatrixMeasure::counting([Matrix::from_rows(&[[c, -s], [s, c]]).unwrap()]).unwrap();
        assert!(!detect_minus_infinity(&e, &rotation).unwrap().minus_infinity);
        let b = estimate_m(&e, &nilpotent_pair(), 1.0, 0.1).unwrap();
        assert_eq!(b.status, Status::MinusInfinity);
        assert_eq!((b.lower, b.upper), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    }

    #[test]
    fn estimate_examples() {
        let e = engine();
        let b = estimate_m(&e, &diag_pair(), 1.0, 0.75).unwrap();
        assert_eq!(b.status, Status::Certified);
        assert!(b.contains((5.0f64 / 6.0).ln()));
        assert!(b.width() <= 0.75);
        assert_eq!(b.source, LowerBoundSource::NormConstant);

        let half = FiniteMatrixMeasure::counting([Matrix::scalar(2, 0.5)]).unwrap();
        let b = estimate_m(&e, &half, 2.0, 0.5).unwrap();
        assert_eq!(b.status, Status::Certified);
        assert!(b.contains(2.0 * 0.5f64.ln()));
    }

    #[test]
    fn budget_exhaustion_keeps_a_valid_bracket() {
        let tight = Engine::new(WordBudget::new(4, 1_000_000, std::time::Duration::from_secs(30)).unwrap());
        let b = estimate_m(&tight, &diag_pair(), 1.0, 1e-3).unwrap();
        assert_eq!(b.status, Status::BudgetExhausted);
        assert_eq!(b.n_used, 2);
        assert!(b.contains((5.0f64 / 6.0).ln()));
    }

    #[test]
    fn p_radius_examples() {
        let e = engine();
        let two = FiniteMatrixMeasure::counting([Matrix::scalar(2, 0.3), Matrix::scalar(2, 0.3)]).unwrap();
        let b = p_radius(&e, &two, 2.0, 0.5).unwrap();
        assert!(b.contains(0.3));
        assert!(b.upper - 0.3 < 1e-9);

        let b = p_radius(&e, &diag_pair(), 1.0, 0.05).unwrap();
        assert!(b.contains(5.0 / 12.0), "{b:?}");

        let weighted = FiniteMatrixMeasure::new(vec![crate::measure::Atom::new(2.0, Matrix::identity(2))]).unwrap();
        assert!(p_radius(&e, &weighted, 2.0, 0.1).is_err());
        assert!(p_radius(&e, &two, 0.5, 0.1).is_err());
    }

    #[test]
    fn invalid_arguments() {
        let e = engine();
        assert!(estimate_m(&e, &diag_pair(), 0.0, 0.1).is_err());
        assert!(estimate_m(&e, &diag_pair(), 1.0, 0.0).is_err());
        assert!(upper_m(&e, &diag_pair(), f64::NAN, 1).is_err());
    }
}
