//! Exact rational arithmetic, closed intervals, budgets and the
//! approximation streams every other module consumes.
//!
//! Nothing in here touches floating point. Rationals are `BigRational`,
//! which keeps values in lowest terms with a positive denominator.

mod enumerate;
mod stream;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use enumerate::{canonical_index, canonical_nth, dyadic_nth, CanonicalRationals, DyadicRationals};
pub use stream::{EffectiveApprox, LeftCEApprox, StreamRule};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("value {0} lies outside [0,1)")]
    NotInUnitInterval(String),
    #[error("effective approximation violated at index {index}: |q_{index} - q_{next}| >= 2^-{index}", next = index + 1)]
    NotEffective { index: usize },
    #[error("left-c.e. approximation not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("stream `{label}` has no term at index {index}")]
    StreamEnded { label: String, index: usize },
    #[error("index {index} out of range for prefix of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid interval: lo {lo} > hi {hi}")]
    InvalidInterval { lo: String, hi: String },
    #[error("budget invalid: fuel {fuel} < depth {depth}")]
    InvalidBudget { fuel: u64, depth: usize },
    #[error("cannot parse `{0}`")]
    Parse(String),
}

/// Raised by any partial search that ran out of steps. Inconclusive, not a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("fuel exhausted")]
pub struct OutOfFuel;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^k` for any integer exponent.
pub fn pow2(k: i64) -> Rational {
    let mag = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

pub fn in_unit_interval(q: &Rational) -> bool {
    !q.is_negative() && q < &Rational::one()
}

/// Always `num/den`, including integers (`1/1`), so CSV cells are uniform.
pub fn fmt_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, KernelError> {
    let s = s.trim();
    let bad = || KernelError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
    }
}

pub fn min_r(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}

pub fn max_r(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

/// Closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, KernelError> {
        if lo > hi {
            return Err(KernelError::InvalidInterval { lo: fmt_rational(&lo), hi: fmt_rational(&hi) });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(q: Rational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    /// `[center - radius, center + radius]`; radius must be nonnegative.
    pub fn around(center: &Rational, radius: &Rational) -> Result<Self, KernelError> {
        Interval::new(center - radius, center + radius)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn measure(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = max_r(&self.lo, &other.lo);
        let hi = min_r(&self.hi, &other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn widen(&self, by: &Rational) -> Interval {
        Interval { lo: &self.lo - by, hi: &self.hi + by }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", fmt_rational(&self.lo), fmt_rational(&self.hi))
    }
}

impl FromStr for Interval {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| KernelError::Parse(t.to_string()))?;
        let (lo, hi) = inner.split_once(',').ok_or_else(|| KernelError::Parse(t.to_string()))?;
        Interval::new(parse_rational(lo)?, parse_rational(hi)?)
    }
}

pub fn interval_measure(i: &Interval) -> Rational {
    i.measure()
}

/// Step bound, prefix depth and tolerance index for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub fuel: u64,
    pub depth: usize,
    pub tolerance_index: usize,
}

impl Budget {
    pub fn new(fuel: u64, depth: usize, tolerance_index: usize) -> Result<Self, KernelError> {
        if fuel < depth as u64 {
            return Err(KernelError::InvalidBudget { fuel, depth });
        }
        Ok(Budget { fuel, depth, tolerance_index })
    }

    /// A fresh step counter for one elementary search.
    pub fn meter(&self) -> Fuel {
        Fuel::new(self.fuel)
    }
}

#[derive(Debug, Clone)]
pub struct Fuel {
    left: u64,
}

impl Fuel {
    pub fn new(steps: u64) -> Self {
        Fuel { left: steps }
    }

    pub fn burn(&mut self, steps: u64) -> Result<(), OutOfFuel> {
        if self.left < steps {
            self.left = 0;
            return Err(OutOfFuel);
        }
        self.left -= steps;
        Ok(())
    }

    pub fn remaining(&self) -> u64 {
        self.left
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid { index: usize },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Accepts iff `|q_{n+1} - q_n| < 2^-n` for every consecutive pair.
pub fn validate_effective(prefix: &[Rational]) -> Validity {
    for (n, w) in prefix.windows(2).enumerate() {
        if (&w[1] - &w[0]).abs() >= pow2(-(n as i64)) {
            return Validity::Invalid { index: n };
        }
    }
    Validity::Valid
}

/// `[q_n - 2^-(n-1), q_n + 2^-(n-1)]`, which contains the limit of any
/// effective approximation extending `prefix`.
pub fn limit_bound(prefix: &[Rational], n: usize) -> Result<Interval, KernelError> {
    let q = prefix.get(n).ok_or(KernelError::IndexOutOfRange { index: n, len: prefix.len() })?;
    Interval::around(q, &pow2(1 - n as i64))
}

pub fn is_leftce_prefix(prefix: &[Rational]) -> Validity {
    for (i, q) in prefix.iter().enumerate() {
        if !in_unit_interval(q) {
            return Validity::Invalid { index: i };
        }
    }
    for (i, w) in prefix.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Validity::Invalid { index: i + 1 };
        }
    }
    Validity::Valid
}

/// `index,value` rows with a header, LF endings.
pub fn prefix_csv(prefix: &[Rational]) -> String {
    let mut out = String::from("index,value\n");
    for (i, q) in prefix.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, fmt_rational(q)));
    }
    out
}
