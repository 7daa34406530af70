//! The affinity dimension `𝔰 = inf{s > 0 : P(μ,s) < 0}` of a measure whose
//! atoms all have norm below one.
//!
//! When `Σ wᵢ|det Aᵢ| ≥ 1` the dimension is at least `d` and solves
//! `Σ wᵢ|det Aᵢ|^{s/d} = 1`. Otherwise `[0, d]` is refined by testing two
//! interior points `t₁ < t₂`: `Φₙ(t) < 1` certifies `𝔰 ≤ t`, and a positive
//! lower bound on `P(μ,t)` certifies `𝔰 ≥ t`.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::measure::FiniteMatrixMeasure;
use crate::pressure::{lower_from_sums, widen_down, widen_up, Status};
use crate::rational::Rational;
use crate::svpressure::{lower_route, LiftLimits, LowerRoute};
use crate::words::{Engine, Kernel, LevelSums};

/// Largest denominator used when snapping trial points for `d ≥ 3`.
pub const DEFAULT_SNAP_DENOMINATOR: u64 = 6;

const BISECTION_MAX_ITER: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffinityBranch {
    Trisection,
    Determinant,
}

impl AffinityBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            AffinityBranch::Trisection => "trisection",
            AffinityBranch::Determinant => "determinant",
        }
    }
}

impl fmt::Display for AffinityBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[lo, hi] ∋ 𝔰` together with every interval visited on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityResult {
    pub lo: f64,
    pub hi: f64,
    pub branch: AffinityBranch,
    pub steps: usize,
    /// `Certified` or `BudgetExhausted`.
    pub status: Status,
    pub history: Vec<(f64, f64)>,
    pub products: u64,
}

impl AffinityResult {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffinityOptions {
    pub limits: LiftLimits,
    pub snap_denominator: u64,
}

impl Default for AffinityOptions {
    fn default() -> Self {
        Self {
            limits: LiftLimits::default(),
            snap_denominator: DEFAULT_SNAP_DENOMINATOR,
        }
    }
}

/// `Σ wᵢ |det Aᵢ| ≥ 1`, i.e. `P(μ,d) ≥ 0`.
pub fn check_geq_d(mu: &FiniteMatrixMeasure) -> bool {
    log_det_sum(mu, mu.dim() as f64) >= 0.0
}

/// `ln Σ wᵢ |det Aᵢ|^{s/d}`.
fn log_det_sum(mu: &FiniteMatrixMeasure, s: f64) -> f64 {
    let d = mu.dim() as f64;
    let terms: Vec<f64> = mu
        .atoms()
        .iter()
        .map(|a| a.weight.ln() + s / d * a.matrix.determinant().abs().ln())
        .collect();
    crate::logsum::log_sum_exp(&terms).ln()
}

/// Bracket `[lo, hi]` of width at most `tol` around the root `s ≥ d` of
/// `Σ wᵢ |det Aᵢ|^{s/d} = 1`.
pub fn det_dimension_interval(mu: &FiniteMatrixMeasure, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    if !check_geq_d(mu) {
        return invalid("Σ w|det A| < 1, so the dimension is below d");
    }
    if let Some(i) = mu.atoms().iter().position(|a| a.matrix.determinant().abs() >= 1.0) {
        return invalid(format!("atom {i} has |det| ≥ 1"));
    }
    let f = |s: f64| log_det_sum(mu, s);
    let mut lo = mu.dim() as f64;
    let mut step = lo.max(1.0);
    let mut hi = lo + step;
    while f(hi) >= 0.0 {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// The root `s ≥ d` of `Σ wᵢ |det Aᵢ|^{s/d} = 1` to within `tol`.
pub fn solve_det_dimension(mu: &FiniteMatrixMeasure, tol: f64) -> Result<f64> {
    let (lo, hi) = det_dimension_interval(mu, tol)?;
    Ok(0.5 * (lo + hi))
}

/// Which certificate moved an endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// `Φₙ(t) < 1`, so `𝔰 ≤ t`.
    Upper,
    /// A positive lower bound on `P(μ,t)`, so `𝔰 ≥ t`.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    Refined {
        lo: f64,
        hi: f64,
        t: f64,
        n: usize,
        certificate: Certificate,
    },
    Inconclusive,
}

struct Trial {
    t: f64,
    route: Option<LowerRoute>,
    active: bool,
    sums: Option<LevelSums>,
}

/// Trial points `t₁ < t₂` near the thirds of `[s1, s2]`. For `d ≥ 3` each
/// is moved to the nearest rational with small denominator inside
/// `[s1 + w/4, s1 + 3w/4]`; `None` marks a point left unsnapped.
fn trial_points(d: usize, s1: f64, s2: f64, snap: u64) -> [(f64, Option<Rational>); 2] {
    let w = s2 - s1;
    let thirds = [(2.0 * s1 + s2) / 3.0, (s1 + 2.0 * s2) / 3.0];
    if d == 2 {
        return thirds.map(|t| (t, None));
    }
    let (lo, hi) = (s1 + 0.25 * w, s1 + 0.75 * w);
    thirds.map(|t| {
        let best = (1..=snap)
            .flat_map(|q| {
                let qf = q as f64;
                [(t * qf).floor(), (t * qf).ceil()].map(move |p| (p, q))
            })
            .filter(|&(p, q)| p >= 0.0 && (lo..=hi).contains(&(p / q as f64)))
            .map(|(p, q)| Rational::new(p as u64, q).expect("q > 0"))
            .min_by(|a, b| (a.to_f64() - t).abs().total_cmp(&(b.to_f64() - t).abs()));
        match best {
            Some(r) => (r.to_f64(), Some(r)),
            None => (t, None),
        }
    })
}

/// Shrinks `[s1, s2] ∋ 𝔰` by testing both trial points at `n = 1, 2, …`
/// until a certificate fires.
pub fn trisect_step(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    s1: f64,
    s2: f64,
    opts: AffinityOptions,
) -> Result<StepOutcome> {
    if !(0.0 <= s1 && s1 < s2) {
        return invalid(format!("need 0 ≤ s1 < s2, got [{s1}, {s2}]"));
    }
    let d = mu.dim();
    let mut trials: Vec<Trial> = trial_points(d, s1, s2, opts.snap_denominator)
        .into_iter()
        .map(|(t, exact)| Trial {
            t,
            route: lower_route(d, t, exact, opts.limits).ok(),
            active: true,
            sums: None,
        })
        .collect();
    let max_len = engine.budget().max_word_length;
    for n in 1.. {
        let mut fired: Vec<StepOutcome> = Vec::new();
        for trial in trials.iter_mut().filter(|t| t.active) {
            let m = trial.route.map_or(1, |r| r.multiplier);
            let full = m * n;
            let depth = full.min(max_len).max(n.min(max_len));
            if trial.sums.as_ref().is_none_or(|c| c.depth() < depth) {
                let grown = trial
                    .sums
                    .as_ref()
                    .map_or(depth, |c| (2 * c.depth()).clamp(depth, max_len));
                let fetched = match engine.level_sums(mu, Kernel::Phi(trial.t), grown) {
                    Err(Error::BudgetExhausted { .. }) if grown > depth => {
                        engine.level_sums(mu, Kernel::Phi(trial.t), depth)
                    }
                    other => other,
                };
                match fetched {
                    Ok(s) => trial.sums = Some(s),
                    Err(Error::BudgetExhausted { .. }) => {
                        trial.active = false;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            // levels past `depth` may be cached but are not consulted yet
            let sums = trial.sums.as_ref().expect("computed above");
            if let Some(j) = (1..=depth).find(|&j| widen_up(sums.sum(j).ln() / j as f64) < 0.0) {
                fired.push(StepOutcome::Refined {
                    lo: s1,
                    hi: trial.t,
                    t: trial.t,
                    n: j,
                    certificate: Certificate::Upper,
                });
                continue;
            }
            match trial.route {
                Some(route) if full <= max_len => {
                    let lower = lower_from_sums(sums, n, m, route.ln_k);
                    if widen_down(lower) > 0.0 {
                        fired.push(StepOutcome::Refined {
                            lo: trial.t,
                            hi: s2,
                            t: trial.t,
                            n,
                            certificate: Certificate::Lower,
                        });
                    }
                }
                // only the upper test remains, and its longest words are done
                _ if depth == max_len => trial.active = false,
                _ => {}
            }
        }
        if let Some(best) = fired.into_iter().min_by(|a, b| width(a).total_cmp(&width(b))) {
            return Ok(best);
        }
        if trials.iter().all(|t| !t.active) {
            return Ok(StepOutcome::Inconclusive);
        }
    }
    unreachable!("the trial loop returns once both points are exhausted")
}

fn width(outcome: &StepOutcome) -> f64 {
    match outcome {
        StepOutcome::Refined { lo, hi, .. } => hi - lo,
        StepOutcome::Inconclusive => f64::INFINITY,
    }
}

/// Certified interval of width at most `eps` containing `𝔰`, or the current
/// interval once the budget runs out.
pub fn affinity_dimension(
    engine: &Engine,
    mu: &FiniteMatrixMeasure,
    eps: f64,
    opts: AffinityOptions,
) -> Result<AffinityResult> {
    if !(eps > 0.0) {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let top = mu.max_operator_norm();
    if !(top < 1.0) {
        return invalid(format!("every atom needs norm below 1, largest is {top}"));
    }
    let start = engine.products_formed();
    if check_geq_d(mu) {
        let (lo, hi) = det_dimension_interval(mu, eps)?;
        return Ok(AffinityResult {
            lo,
            hi,
            branch: AffinityBranch::Determinant,
            steps: 0,
            status: Status::Certified,
            history: vec![(lo, hi)],
            products: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, mu.dim() as f64);
    let mut history = vec![(lo, hi)];
    let mut steps = 0;
    let mut status = Status::Certified;
    while hi - lo > eps {
        match trisect_step(engine, mu, lo, hi, opts)? {
            StepOutcome::Refined { lo: a, hi: b, .. } => {
                (lo, hi) = (a, b);
                steps += 1;
                history.push((lo, hi));
            }
            StepOutcome::Inconclusive => {
                status = Status::BudgetExhausted;
                break;
            }
        }
    }
    Ok(AffinityResult {
        lo,
        hi,
        branch: AffinityBranch::Trisection,
        steps,
        status,
        history,
        products: engine.products_formed() - start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::measure::Atom;
    use crate::words::WordBudget;
    use approx::assert_relative_eq;

    fn engine() -> Engine {
        Engine::new(WordBudget::default())
    }

    fn copies(n: usize, d: usize, c: f64) -> FiniteMatrixMeasure {
        FiniteMatrixMeasure::counting(vec![Matrix::scalar(d, c); n]).unwrap()
    }

    #[test]
    fn determinant_branch_detection() {
        assert!(check_geq_d(&copies(4, 2, 0.8)));
        assert!(!check_geq_d(&copies(3, 2, 0.5)));
        let singular = FiniteMatrixMeasure::counting(vec![Matrix::diag(&[0.9, 0.0]); 5]).unwrap();
        assert!(!check_geq_d(&singular));
    }

    #[test]
    fn determinant_root_examples() {
        let s = solve_det_dimension(&copies(4, 2, 0.8), 1e-12).unwrap();
        assert_relative_eq!(s, 2.0 * 4f64.ln() / (1.0 / 0.64f64).ln(), max_relative = 1e-11);
        assert_relative_eq!(s, 6.21257, epsilon = 1e-5);
        let e = std::f64::consts::E;
        let a = Matrix::diag(&[(-0.5f64).exp(), (-0.5f64).exp()]);
        let boundary = FiniteMatrixMeasure::new(vec![Atom::new(e, a)]).unwrap();
        assert_relative_eq!(solve_det_dimension(&boundary, 1e-12).unwrap(), 2.0, epsilon = 1e-10);
        // Moran form N c^s = 1
        let s = solve_det_dimension(&copies(40, 2, 0.5), 1e-12).unwrap();
        assert_relative_eq!(s, 40f64.ln() / 2f64.ln(), max_relative = 1e-11);
        assert!(solve_det_dimension(&copies(3, 2, 0.5), 1e-9).is_err());
        assert!(solve_det_dimension(&copies(3, 2, 1.2), 1e-9).is_err());
    }

    #[test]
    fn first_step_on_similarities() {
        let out = trisect_step(&engine(), &copies(3, 2, 0.5), 0.0, 2.0, AffinityOptions::default()).unwrap();
        match out {
            StepOutcome::Refined {
                lo, hi, certificate, ..
            } => {
                assert_relative_eq!(lo, 2.0 / 3.0, max_relative = 1e-15);
                assert_eq!(hi, 2.0);
                assert_eq!(certificate, Certificate::Lower);
            }
            StepOutcome::Inconclusive => panic!("expected a refinement"),
        }
    }

    #[test]
    fn upper_test_fires_at_once_below_zero_pressure() {
        // t₂ = 1.704 where 3·2^{-t₂} < 1
        let (s1, s2) = (1.2, (3.0 * 1.704 - 1.2) / 2.0);
        let out = trisect_step(&engine(), &copies(3, 2, 0.5), s1, s2, AffinityOptions::default()).unwrap();
        match out {
            StepOutcome::Refined {
                lo, hi, n, certificate, ..
            } => {
                assert_eq!(certificate, Certificate::Upper);
                assert_eq!(n, 1);
                assert_eq!(lo, s1);
                assert_relative_eq!(hi, 1.704, max_relative = 1e-12);
            }
            StepOutcome::Inconclusive => panic!("expected a refinement"),
        }
    }

    #[test]
    fn moran_examples() {
        let e = engine();
        let r = affinity_dimension(&e, &copies(3, 2, 0.5), 0.7, AffinityOptions::default()).unwrap();
        assert_eq!(r.status, Status::Certified);
        assert_eq!(r.branch, AffinityBranch::Trisection);
        assert!(r.width() <= 0.7);
        assert!(r.contains(3f64.ln() / 2f64.ln()));
        for &(lo, hi) in &r.history {
            assert!(lo <= 3f64.ln() / 2f64.ln() && 3f64.ln() / 2f64.ln() <= hi);
        }
        let r = affinity_dimension(&e, &copies(2, 2, 1.0 / 3.0), 0.7, AffinityOptions::default()).unwrap();
        assert!(r.contains(2f64.ln() / 3f64.ln()));
        let r = affinity_dimension(&e, &copies(4, 2, 0.8), 1e-8, AffinityOptions::default()).unwrap();
        assert_eq!(r.branch, AffinityBranch::Determinant);
        assert!(r.width() <= 1e-8);
        assert!((r.lo - 6.21257).abs() < 1e-5);
    }

    #[test]
    fn three_dimensional_snapping() {
        let pts = trial_points(3, 0.0, 3.0, 6);
        assert_eq!(pts[0], (1.0, Some(Rational::integer(1))));
        assert_eq!(pts[1], (2.0, Some(Rational::integer(2))));
        let pts = trial_points(3, 1.0, 1.1, 6);
        assert!(pts.iter().all(|(_, r)| r.is_none()));
        let r = affinity_dimension(&engine(), &copies(2, 3, 0.5), 0.8, AffinityOptions::default()).unwrap();
        assert!(r.contains(1.0), "{r:?}");
    }

    #[test]
    fn preconditions() {
        assert!(affinity_dimension(&engine(), &copies(2, 2, 1.0), 0.5, AffinityOptions::default()).is_err());
        assert!(affinity_dimension(&engine(), &copies(2, 2, 0.5), 0.0, AffinityOptions::default()).is_err());
        assert!(trisect_step(&engine(), &copies(2, 2, 0.5), 1.0, 1.0, AffinityOptions::default()).is_err());
    }
}
