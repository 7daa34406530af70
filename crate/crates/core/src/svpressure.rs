//! Singular value pressure `P(μ,s) = lim (1/n) ln ∫ φ^s dμₙ`.
//!
//! Lower bounds, by exponent:
//!
//! * `s ≥ d`: `P = ln Σ wᵢ |det Aᵢ|^{s/d}` exactly.
//! * `d = 2`: `Φ_{2n} ≤ K̃_s e^{nP} Φₙ`.
//! * `s ≤ 1`: `φ^s = ‖·‖^s`, so the norm-pressure inequality applies.
//! * rational `s = k + p/q`: `Φ_{nd′} ≤ K e^{nP} Φₙ^{d′-1}` with
//!   `d′ = C(d,k)^{q-p} C(d,k+1)^p` and
//!   `K = d′^{2+(d′+1)/q} (d′+1)^{(q-1)/q}`.
//! * other `s`: a rational `s⁺ ≥ s`, since `P` is non-increasing in `s`
//!   once every atom is scaled into the unit ball.

use crate::error::{invalid, Error, Result};
use crate::linalg::{binomial, validate_lift_params};
use crate::measure::{lifted_measure, restrict_invertible, scale_measure, FiniteMatrixMeasure, DEFAULT_LIFT_DIM_CAP};
use crate::pressure::{
    log_norm_constant, lower_from_sums, lower_m, run_bracket, LowerBoundSource, PressureBracket, Route, Status,
};
use crate::rational::Rational;
use crate::words::{Engine, Kernel};

/// Default cap on the denominator of a lift exponent.
pub const DEFAULT_Q_CAP: u64 = 6;

/// Tolerance for recognising a float exponent as a small-denominator rational.
pub const RATIONAL_MATCH_TOL: f64 = 1e-12;

/// Feasibility limits for the rational-exponent lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiftLimits {
    pub q_cap: u64,
    pub dim_cap: usize,
}

impl Default for LiftLimits {
    fn default() -> Self {
        Self {
            q_cap: DEFAULT_Q_CAP,
            dim_cap: DEFAULT_LIFT_DIM_CAP,
        }
    }
}

/// `K̃_s`: `2^{3+2s}` on `(0,1]`, `2^{7-2s}` on `[1,2)`, `1` from `2` on.
pub fn k_tilde(s: f64) -> f64 {
    log_k_tilde(s).exp()
}

pub fn log_k_tilde(s: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    if s <= 1.0 {
        (3.0 + 2.0 * s) * ln2
    } else if s < 2.0 {
        (7.0 - 2.0 * s) * ln2
    } else {
        0.0
    }
}

/// Parameters of the lift for `s = k + p/q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftSpec {
    pub k: usize,
    pub p: u64,
    pub q: u64,
    pub d_prime: usize,
    /// `ln K` with `K = d′^{2+(d′+1)/q} (d′+1)^{(q-1)/q}`.
    pub ln_k: f64,
}

impl LiftSpec {
    pub fn k_flight(&self) -> f64 {
        self.ln_k.exp()
    }

    pub fn exponent(&self) -> f64 {
        self.k as f64 + self.p as f64 / self.q as f64
    }
}

/// `d′` and `K` for `s = k + p/q ∈ (0, d)` with `k ≥ 1`.
pub fn flight_params(d: usize, s: Rational, dim_cap: usize) -> Result<LiftSpec> {
    let (k, p, q) = s.split();
    let k = k as usize;
    if s.to_f64() >= d as f64 {
        return invalid(format!("lift exponent {s} must be below d = {d}"));
    }
    validate_lift_params(d, k, p, q)?;
    let d_prime = binomial(d, k)
        .checked_pow((q - p) as u32)
        .and_then(|a| binomial(d, k + 1).checked_pow(p as u32).and_then(|b| a.checked_mul(b)))
        .unwrap_or(u128::MAX);
    if d_prime > dim_cap as u128 {
        return Err(Error::DimensionCapExceeded {
            dimension: d_prime,
            cap: dim_cap,
        });
    }
    let dp = d_prime as f64;
    let qf = q as f64;
    let ln_k = (2.0 + (dp + 1.0) / qf) * dp.ln() + (qf - 1.0) / qf * (dp + 1.0).ln();
    Ok(LiftSpec {
        k,
        p,
        q,
        d_prime: d_prime as usize,
        ln_k,
    })
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return invalid(format!("exponent s must be positive and finite, got {s}"));
    }
    Ok(())
}

/// `(1/n) ln Φₙ(s)`.
pub fn upper_p(engine: &Engine, mu: &FiniteMatrixMeasure, s: f64, n: usize) -> Result<f64> {
    check_exponent(s)?;
    Ok(engine.weighted_power_sum(mu, n, Kernel::Phi(s))?.ln() / n as f64)
}

/// `(1/n)[ln Φ_{2n} − ln K̃_s − ln Φₙ]` for `d = 2`.
pub fn lower_p_2d(engine: &Engine, mu: &FiniteMatrixMeasure, s: f64, n: usize) -> Result<f64> {
    check_exponent(s)?;
    if mu.dim() != 2 {
        return invalid(format!("the planar bound needs d = 2, got d = {}", mu.dim()));
    }
    let sums = engine.level_sums(mu, Kernel::Phi(s), 2 * n)?;
    Ok(lower_from_sums(&sums, n, 2, log_k_tilde(s)))
}

/// `(1/n)[ln Φ_{nd′} − ln K − (d′−1) ln Φₙ]` for rational `s`.
pub fn lower_p_lift(engine: &Engine, mu: &FiniteMatrixMeasure, s: Rational, n: usize, dim_cap: usize) -> Result<f64> {
    let spec = flight_params(mu.dim(), s, dim_cap)?;
    let sums = engine.level_sums(mu, Kernel::Phi(s.to_f64()), n * spec.d_prime)?;
    Ok(lower_from_sums(&sums, n, spec.d_prime, spec.ln_k))
}

/// The norm-pressure lower bound of the lifted measure at exponent `1/q`.
///
/// Its word sums coincide with those of [`lower_p_lift`]; only the constant
/// differs, `K_{d′,1/q}` in place of `K`.
pub fn lower_p_lifted_measure(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    s: Rational,
    n: usize,
    dim_cap: usize,
) -> Result<f64> {
    let (k, p, q) = s.split();
    let lifted = lifted_measure(mu, k as usize, p, q, dim_cap)?;
    lower_m(engine, &lifted, 1.0 / q as f64, n)
}

/// `ln Σ wᵢ |det Aᵢ|^{s/d}`, the exact pressure for `s ≥ d`.
pub fn det_pressure(mu: &FiniteMatrixMeasure, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let d = mu.dim() as f64;
    if s < d {
        return invalid(format!("the determinant formula needs s ≥ d = {d}, got {s}"));
    }
    Ok(log_det_sum(mu, s))
}

fn log_det_sum(mu: &FiniteMatrixMeasure, s: f64) -> f64 {
    let d = mu.dim() as f64;
    let terms: Vec<f64> = mu
        .atoms()
        .iter()
        .map(|a| a.weight.ln() + s / d * a.matrix.determinant().abs().ln())
        .collect();
    crate::logsum::log_sum_exp(&terms).ln()
}

/// The lower-bound inequality available at exponent `t`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LowerRoute {
    pub kernel: Kernel,
    pub multiplier: usize,
    pub ln_k: f64,
    pub source: LowerBoundSource,
}

/// Chooses the lower-bound inequality for exponent `t`; `exact` is the
/// rational value of `t` when one is known.
pub(crate) fn lower_route(d: usize, t: f64, exact: Option<Rational>, limits: LiftLimits) -> Result<LowerRoute> {
    if t >= d as f64 {
        return Ok(LowerRoute {
            kernel: Kernel::Phi(t),
            multiplier: 1,
            ln_k: 0.0,
            source: LowerBoundSource::Determinant,
        });
    }
    if d == 2 {
        return Ok(LowerRoute {
            kernel: Kernel::Phi(t),
            multiplier: 2,
            ln_k: log_k_tilde(t),
            source: LowerBoundSource::PlanarConstant,
        });
    }
    if t <= 1.0 {
        return Ok(LowerRoute {
            // φ^t = ‖·‖^t here, and the φ kernel lets one enumeration serve both bounds
            kernel: Kernel::Phi(t),
            multiplier: d,
            ln_k: log_norm_constant(d, t),
            source: LowerBoundSource::NormConstant,
        });
    }
    let Some(r) = exact else {
        return invalid(format!(
            "exponent {t} has no rational form with denominator ≤ {}",
            limits.q_cap
        ));
    };
    if r.denom() > limits.q_cap {
        return invalid(format!("denominator of {r} exceeds the cap {}", limits.q_cap));
    }
    let spec = flight_params(d, r, limits.dim_cap)?;
    Ok(LowerRoute {
        kernel: Kernel::Phi(t),
        multiplier: spec.d_prime,
        ln_k: spec.ln_k,
        source: LowerBoundSource::LiftConstant,
    })
}

fn exact_bracket(value: f64) -> PressureBracket {
    PressureBracket {
        lower: value,
        upper: value,
        n_used: 1,
        status: if value == f64::NEG_INFINITY {
            Status::MinusInfinity
        } else {
            Status::Certified
        },
        source: LowerBoundSource::Determinant,
        products: 0,
    }
}

/// Certified bracket on `P(μ,s)` of width at most `eps`.
pub fn estimate_p(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    s: f64,
    eps: f64,
    limits: LiftLimits,
) -> Result<PressureBracket> {
    check_exponent(s)?;
    let tol = RATIONAL_MATCH_TOL * s.max(1.0);
    estimate_with(engine, mu, s, Rational::approximate(s, limits.q_cap, tol), eps, limits)
}

/// [`estimate_p`] at an exactly rational exponent.
pub fn estimate_p_rational(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    s: Rational,
    eps: f64,
    limits: LiftLimits,
) -> Result<PressureBracket> {
    if s.numer() == 0 {
        return invalid("exponent s must be positive");
    }
    let limits = LiftLimits {
        q_cap: limits.q_cap.max(s.denom()),
        ..limits
    };
    estimate_with(engine, mu, s.to_f64(), Some(s), eps, limits)
}

fn estimate_with(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    s: f64,
    exact: Option<Rational>,
    eps: f64,
    limits: LiftLimits,
) -> Result<PressureBracket> {
    check_exponent(s)?;
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let d = mu.dim();
    if s >= d as f64 || d == 1 {
        return Ok(exact_bracket(log_det_sum(mu, s)));
    }
    if d == 2 || s <= 1.0 || exact.is_some() {
        let route = lower_route(d, s, exact, limits)?;
        return run_bracket(engine, mu, route_from(Kernel::Phi(s), route), eps);
    }
    // P(ν,s) is non-increasing in s when every atom of ν lies in the unit ball;
    // scaling by an exact power of two shifts P(·,s) by s·e·ln 2
    let s_plus = Rational::ceil_with_denominator(s, limits.q_cap);
    let top = mu.max_operator_norm();
    let e = if top > 1.0 { top.log2().ceil() } else { 0.0 };
    let nu = scale_measure(mu, (-e).exp2())?;
    let route = lower_route(d, s_plus.to_f64(), Some(s_plus), limits)?;
    let bracket = run_bracket(engine, &nu, route_from(Kernel::Phi(s), route), eps)?;
    let shift = s * e * std::f64::consts::LN_2;
    Ok(bracket.map(|x| x + shift))
}

fn route_from(upper_kernel: Kernel, lower: LowerRoute) -> Route {
    Route {
        upper_kernel,
        lower_kernel: lower.kernel,
        multiplier: lower.multiplier,
        ln_k: lower.ln_k,
        source: lower.source,
    }
}

/// Classification of `s ↦ P(μ,s)` at `s = 1` for `d = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Continuity {
    ContinuousAt1,
    DiscontinuousAt1,
    Inconclusive,
}

impl Continuity {
    pub fn as_str(self) -> &'static str {
        match self {
            Continuity::ContinuousAt1 => "continuous_at_1",
            Continuity::DiscontinuousAt1 => "discontinuous_at_1",
            Continuity::Inconclusive => "inconclusive",
        }
    }
}

/// Verdict together with the brackets on `P(μ,1)` and `P(μ⁰,1)`; the
/// brackets are absent when `μ⁰ = μ` settles the question.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityReport {
    pub verdict: Continuity,
    pub full: Option<PressureBracket>,
    pub invertible: Option<PressureBracket>,
}

/// `P(·,s)` jumps at `s = 1` exactly when `P(μ,1) > P(μ⁰,1)`, where `μ⁰`
/// keeps only the invertible atoms.
pub fn discontinuity_check_2d(engine: &Engine, mu: &FiniteMatrixMeasure, eps: f64) -> Result<ContinuityReport> {
    if mu.dim() != 2 {
        return invalid(format!("the continuity diagnostic needs d = 2, got d = {}", mu.dim()));
    }
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let restricted = restrict_invertible(mu);
    if restricted.as_ref().is_some_and(|r| r.len() == mu.len()) {
        return Ok(ContinuityReport {
            verdict: Continuity::ContinuousAt1,
            full: None,
            invertible: None,
        });
    }
    let limits = LiftLimits::default();
    let full = estimate_p(engine, mu, 1.0, eps / 2.0, limits)?;
    let invertible = match &restricted {
        Some(r) => estimate_p(engine, r, 1.0, eps / 2.0, limits)?,
        None => PressureBracket::minus_infinity(0, 0),
    };
    let verdict = if full.upper == f64::NEG_INFINITY {
        Continuity::ContinuousAt1
    } else if full.lower > invertible.upper {
        Continuity::DiscontinuousAt1
    } else if full.upper - invertible.lower <= eps {
        Continuity::ContinuousAt1
    } else {
        Continuity::Inconclusive
    };
    Ok(ContinuityReport {
        verdict,
        full: Some(full),
        invertible: Some(invertible),
    })
}
