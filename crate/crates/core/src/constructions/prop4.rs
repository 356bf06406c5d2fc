//! The separation instance: the test `I_n = [q_n, q_n + 2^-2n]` over the
//! canonical enumeration, a point avoiding its first `depth` intervals, and
//! the witness `g(q_n) = 1 - 2^-2n`.
//!
//! The avoiding point is found by nested bisection. It is a rational
//! stand-in, good at the stated depth only; nothing here is noncomputable.

use num_traits::{One, Zero};

use crate::kernel::{canonical_nth, pow2, EffectiveApprox, Interval, Rational};
use crate::witnesses::{BaseOrder, QRule, QWitness, RealName};

use super::ConstructionError;

#[derive(Debug, Clone)]
pub struct Prop4Instance {
    pub depth: usize,
    /// `q_1, ..., q_depth`
    pub points: Vec<Rational>,
    /// `I_1, ..., I_depth`
    pub intervals: Vec<Interval>,
    /// Bisection cells from `[0,1]` down to width `2^-depth`.
    pub cells: Vec<Interval>,
    pub beta_star: Rational,
    pub beta: EffectiveApprox,
    pub witness: QWitness,
}

/// `I_n` for any `n >= 1`.
pub fn test_interval(n: usize) -> Interval {
    let q = canonical_nth(n);
    let hi = &q + pow2(-2 * n as i64);
    Interval::new(q, hi).expect("lo below hi")
}

/// `sum_{n=1..depth} 2^-2n`
pub fn partial_measure(depth: usize) -> Rational {
    (1..=depth).map(|n| pow2(-2 * n as i64)).fold(Rational::zero(), |a, b| a + b)
}

/// Maximal covered sub-intervals of `cell`, sorted and disjoint.
fn covered(cell: &Interval, intervals: &[Interval]) -> Vec<(Rational, Rational)> {
    let mut parts: Vec<(Rational, Rational)> = intervals
        .iter()
        .filter_map(|i| i.intersect(cell))
        .map(|i| (i.lo().clone(), i.hi().clone()))
        .collect();
    parts.sort();
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in parts {
        match merged.last_mut() {
            Some((_, h)) if lo <= *h => {
                if hi > *h {
                    *h = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

fn uncovered_measure(cell: &Interval, intervals: &[Interval]) -> Rational {
    let cov = covered(cell, intervals).into_iter().fold(Rational::zero(), |acc, (lo, hi)| acc + hi - lo);
    cell.measure() - cov
}

/// Open gaps of `cell` outside every interval.
fn gaps(cell: &Interval, intervals: &[Interval]) -> Vec<(Rational, Rational)> {
    let mut out = Vec::new();
    let mut at = cell.lo().clone();
    for (lo, hi) in covered(cell, intervals) {
        if lo > at {
            out.push((at.clone(), lo));
        }
        if hi > at {
            at = hi;
        }
    }
    if cell.hi() > &at {
        out.push((at, cell.hi().clone()));
    }
    out
}

pub fn build_prop4_instance(depth: usize) -> Result<Prop4Instance, ConstructionError> {
    if depth == 0 {
        return Err(ConstructionError::ZeroDepth);
    }
    let intervals: Vec<Interval> = (1..=depth).map(test_interval).collect();
    let points: Vec<Rational> = intervals.iter().map(|i| i.lo().clone()).collect();
    let two = Rational::from_integer(2.into());

    let mut cell = Interval::new(Rational::zero(), Rational::one()).expect("unit interval");
    let mut cells = vec![cell.clone()];
    for _ in 0..depth {
        let mid = (cell.lo() + cell.hi()) / &two;
        let left = Interval::new(cell.lo().clone(), mid.clone()).expect("ordered");
        let right = Interval::new(mid, cell.hi().clone()).expect("ordered");
        cell = if uncovered_measure(&left, &intervals) >= uncovered_measure(&right, &intervals) { left } else { right };
        cells.push(cell.clone());
    }
    let (glo, ghi) = gaps(&cell, &intervals)
        .into_iter()
        .max_by(|x, y| (&x.1 - &x.0).cmp(&(&y.1 - &y.0)).then(y.0.cmp(&x.0)))
        .ok_or(ConstructionError::AvoidanceFailed { depth })?;
    let beta_star = (glo + ghi) / &two;
    if intervals.iter().any(|i| i.contains(&beta_star)) {
        return Err(ConstructionError::AvoidanceFailed { depth });
    }

    let mids: Vec<Rational> = cells[..depth].iter().map(|c| (c.lo() + c.hi()) / &two).collect();
    let star = beta_star.clone();
    let beta = EffectiveApprox::from_fn("beta*", move |k| Some(mids.get(k).cloned().unwrap_or_else(|| star.clone())));

    let mut witness = QWitness::new("prop4", QRule::Prop4, Rational::one()).with_base(BaseOrder::Canonical);
    witness.total = true;
    witness.monotone = false;
    Ok(Prop4Instance { depth, points, intervals, cells, beta_star, beta, witness })
}

impl Prop4Instance {
    /// `(q_n, 1 - 2^-2n)` for `n <= depth`.
    pub fn table(&self) -> Vec<(Rational, Rational)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, q)| (q.clone(), Rational::one() - pow2(-2 * (i as i64 + 1))))
            .collect()
    }

    pub fn partial_measure(&self) -> Rational {
        partial_measure(self.depth)
    }

    pub fn beta_name(&self) -> RealName {
        RealName::effective("beta*", self.beta.clone())
    }

    /// Checks `1 - g(q_n) = 2^-2n < beta* - q_n` for every `q_n < beta*` with
    /// `n <= depth`; returns how many `q_n` were certified below.
    pub fn validate(&self) -> Result<usize, ConstructionError> {
        let mut certified = 0;
        for (i, (q, g)) in self.table().into_iter().enumerate() {
            if q < self.beta_star {
                certified += 1;
                if Rational::one() - g >= &self.beta_star - &q {
                    return Err(ConstructionError::AvoidanceFailed { depth: i + 1 });
                }
            }
        }
        Ok(certified)
    }
}
