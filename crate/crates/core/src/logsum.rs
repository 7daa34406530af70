//! Log-domain values and underflow-safe summation.

use std::fmt;

/// A non-negative quantity stored as its natural logarithm. `-∞` is zero.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogValue(ln)
    }

    /// Panics on negative input.
    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0, "LogValue needs a non-negative value, got {x}");
        LogValue(x.ln())
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl std::ops::Add for LogValue {
    type Output = LogValue;

    fn add(self, other: LogValue) -> LogValue {
        LogValue(log_add_exp(self.0, other.0))
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogValue(ln = {})", self.0)
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

const BLOCK: usize = 256;

/// Streaming `ln Σ e^{xᵢ}`.
///
/// Terms are buffered in fixed-size blocks; each block is reduced with a
/// max shift and Neumaier summation, then folded into a running total that
/// is itself kept relative to its own shift.
#[derive(Clone, Debug)]
pub struct LogSum {
    shift: f64,
    sum: f64,
    comp: f64,
    block: Vec<f64>,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
            block: Vec::with_capacity(BLOCK),
        }
    }

    #[inline]
    pub fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        self.block.push(ln_term);
        if self.block.len() == BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.block.is_empty() {
            return;
        }
        let m = self.block.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let (mut s, mut c) = (0.0, 0.0);
        for &x in &self.block {
            neumaier_add(&mut s, &mut c, (x - m).exp());
        }
        self.block.clear();
        self.fold_in(m, s, c);
    }

    fn fold_in(&mut self, shift: f64, sum: f64, comp: f64) {
        if sum + comp == 0.0 {
            return;
        }
        if shift > self.shift {
            let r = (self.shift - shift).exp();
            self.sum *= r;
            self.comp *= r;
            self.shift = shift;
            neumaier_add(&mut self.sum, &mut self.comp, sum);
            neumaier_add(&mut self.sum, &mut self.comp, comp);
        } else {
            let r = (shift - self.shift).exp();
            neumaier_add(&mut self.sum, &mut self.comp, sum * r);
            neumaier_add(&mut self.sum, &mut self.comp, comp * r);
        }
    }

    /// Folds another partial sum into this one.
    pub fn merge(&mut self, mut other: LogSum) {
        other.flush();
        self.flush();
        self.fold_in(other.shift, other.sum, other.comp);
    }

    pub fn finish(mut self) -> LogValue {
        self.flush();
        let total = self.sum + self.comp;
        if total <= 0.0 {
            LogValue::ZERO
        } else {
            LogValue::from_ln(self.shift + total.ln())
        }
    }
}

#[inline]
fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// `ln Σ e^{xᵢ}` of a slice.
pub fn log_sum_exp(terms: &[f64]) -> LogValue {
    let mut acc = LogSum::new();
    terms.iter().for_each(|&x| acc.push(x));
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_zero_terms() {
        assert!(LogSum::new().finish().is_zero());
        assert!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).is_zero());
    }

    #[test]
    fn tiny_terms_do_not_underflow() {
        let terms = vec![-2000.0; 1000];
        let got = log_sum_exp(&terms).ln();
        assert!((got - (-2000.0 + 1000f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn increasing_shift_across_blocks() {
        let terms: Vec<f64> = (0..2000).map(|i| i as f64 * 0.5 - 700.0).collect();
        let expected = terms.iter().map(|x| (x - 299.5).exp()).sum::<f64>().ln() + 299.5;
        assert!((log_sum_exp(&terms).ln() - expected).abs() < 1e-12);
    }

    #[test]
    fn merge_matches_single_pass() {
        let terms: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0 - 5.0).collect();
        let whole = log_sum_exp(&terms);
        let mut a = LogSum::new();
        let mut b = LogSum::new();
        for (i, &t) in terms.iter().enumerate() {
            if i % 3 == 0 {
                a.push(t)
            } else {
                b.push(t)
            }
        }
        a.merge(b);
        assert!((a.finish().ln() - whole.ln()).abs() < 1e-13);
    }

    #[test]
    fn compensation_recovers_small_addends() {
        let mut terms = vec![0.0];
        terms.extend(std::iter::repeat_n((1e-16f64).ln(), 10_000));
        let got = log_sum_exp(&terms).ln();
        assert!((got - (1.0 + 1e-12f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn log_add_exp_basics() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(LogValue::ONE + LogValue::ZERO, LogValue::ONE);
    }
}
