//! Fixed enumerations of rationals in `[0,1)`.
//!
//! Canonical order is breadth-first by denominator, then numerator, over
//! reduced fractions, and is 1-indexed: `0, 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...`.
//! Dyadic order is 0-indexed: `0, 1/2, 1/4, 3/4, 1/8, 3/8, ...`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{in_unit_interval, Rational};

fn reduced_count(den: u64) -> u64 {
    if den == 1 {
        1
    } else {
        (1..den).filter(|n| n.gcd(&den) == 1).count() as u64
    }
}

#[derive(Debug, Clone)]
pub struct CanonicalRationals {
    num: u64,
    den: u64,
}

impl CanonicalRationals {
    pub fn new() -> Self {
        CanonicalRationals { num: 0, den: 1 }
    }
}

impl Default for CanonicalRationals {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for CanonicalRationals {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        let out = Rational::new(BigInt::from(self.num), BigInt::from(self.den));
        loop {
            self.num += 1;
            if self.num >= self.den {
                self.den += 1;
                self.num = 1;
            }
            if self.num.gcd(&self.den) == 1 {
                break;
            }
        }
        Some(out)
    }
}

/// The `k`-th rational of the canonical order, `k >= 1`.
pub fn canonical_nth(k: usize) -> Rational {
    assert!(k >= 1, "canonical enumeration is 1-indexed");
    let mut rest = k as u64 - 1;
    let mut den = 1u64;
    loop {
        let c = reduced_count(den);
        if rest < c {
            break;
        }
        rest -= c;
        den += 1;
    }
    if den == 1 {
        return Rational::from_integer(BigInt::from(0));
    }
    let num = (1..den).filter(|n| n.gcd(&den) == 1).nth(rest as usize).expect("rank within count");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Position of `q` in the canonical order (1-indexed); `None` outside `[0,1)`
/// or for denominators too large to index.
pub fn canonical_index(q: &Rational) -> Option<usize> {
    if !in_unit_interval(q) {
        return None;
    }
    let den = q.denom().to_u64()?;
    let num = q.numer().to_u64()?;
    let before: u64 = (1..den).map(reduced_count).sum();
    let rank = if den == 1 { 0 } else { (1..num).filter(|n| n.gcd(&den) == 1).count() as u64 };
    Some((1 + before + rank) as usize)
}

pub fn dyadic_nth(i: usize) -> Rational {
    if i == 0 {
        return Rational::from_integer(BigInt::from(0));
    }
    let level = usize::BITS - i.leading_zeros();
    let first = 1usize << (level - 1);
    let num = 2 * (i - first) + 1;
    Rational::new(BigInt::from(num), BigInt::from(1u64) << level)
}

#[derive(Debug, Clone, Default)]
pub struct DyadicRationals {
    next: usize,
}

impl DyadicRationals {
    pub fn new() -> Self {
        DyadicRationals { next: 0 }
    }
}

impl Iterator for DyadicRationals {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        let q = dyadic_nth(self.next);
        self.next += 1;
        Some(q)
    }
}
