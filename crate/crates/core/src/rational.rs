//! Non-negative rationals in lowest terms, used for lift exponents.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return invalid("rational with zero denominator");
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(k: u64) -> Self {
        Self { num: k, den: 1 }
    }

    pub fn numer(self) -> u64 {
        self.num
    }

    pub fn denom(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `(k, p, q)` with `self = k + p/q`, `0 ≤ p < q`, `gcd(p, q) = 1`.
    pub fn split(self) -> (u64, u64, u64) {
        (self.num / self.den, self.num % self.den, self.den)
    }

    /// The rational with the smallest denominator `≤ q_cap` within `tol` of
    /// `x`, if any.
    pub fn approximate(x: f64, q_cap: u64, tol: f64) -> Option<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return None;
        }
        (1..=q_cap.max(1)).find_map(|q| {
            let p = (x * q as f64).round();
            ((p / q as f64 - x).abs() <= tol).then(|| Self::new(p as u64, q).expect("q > 0"))
        })
    }

    /// The smallest rational `≥ x` with denominator `≤ q_cap`.
    pub fn ceil_with_denominator(x: f64, q_cap: u64) -> Self {
        let x = x.max(0.0);
        (1..=q_cap.max(1))
            .map(|q| {
                let mut p = (x * q as f64).ceil();
                if p / (q as f64) < x {
                    p += 1.0;
                }
                Self::new(p as u64, q).expect("q > 0")
            })
            .min_by(|a, b| a.cmp_value(b))
            .expect("q_cap ≥ 1")
    }

    fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Accepts `"7"`, `"3/2"` and `"1+1/2"`.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidInput(format!("cannot parse {text:?} as a rational"));
        let int = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let (whole, frac) = match text.split_once('+') {
            Some((w, f)) => (int(w)?, Some(f)),
            None if text.contains('/') => (0, Some(text)),
            None => (int(text)?, None),
        };
        let Some(frac) = frac else {
            return Ok(Self::integer(whole));
        };
        let (p, q) = frac.split_once('/').ok_or_else(bad)?;
        let (p, q) = (int(p)?, int(q)?);
        if q == 0 {
            return Err(bad());
        }
        let num = whole.checked_mul(q).and_then(|w| w.checked_add(p)).ok_or_else(bad)?;
        Self::new(num, q)
    }
}
