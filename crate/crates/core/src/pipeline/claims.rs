//! Finite-depth checks of the stage properties on argument tuples
//! `(p, q, m, n)` with `p < q` and `m < n`.

use std::collections::HashMap;

use num_traits::Signed;

use crate::kernel::{fmt_rational, pow2, Fuel, Rational};
use crate::witnesses::{RealName, Tri};

use super::{Pipeline, PipelineError, StageValue};

/// A failed property: its number, whether the quantity met a strict bound
/// exactly, and a rendering of the tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub claim: u32,
    pub tie: bool,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}){} {}", self.claim, if self.tie { " tie" } else { "" }, self.detail)
    }
}

/// Checks each property and records violations; inequalities over `alpha`
/// and `beta` count only when certified by their enclosures.
pub struct ClaimChecker<'a> {
    pipeline: &'a Pipeline,
    alpha: &'a RealName,
    beta: &'a RealName,
    depth: usize,
    memo: HashMap<(Rational, usize), StageValue>,
    pub checked: usize,
    pub uncertified: usize,
    pub violations: Vec<Violation>,
}

fn subset(a: &[Rational], b: &[Rational]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

impl<'a> ClaimChecker<'a> {
    pub fn new(pipeline: &'a Pipeline, alpha: &'a RealName, beta: &'a RealName, depth: usize) -> Self {
        ClaimChecker { pipeline, alpha, beta, depth, memo: HashMap::new(), checked: 0, uncertified: 0, violations: Vec::new() }
    }

    fn stage(&mut self, q: &Rational, n: usize, fuel: &mut Fuel) -> Result<StageValue, PipelineError> {
        let key = (q.clone(), n);
        if let Some(s) = self.memo.get(&key) {
            return Ok(s.clone());
        }
        let s = self.pipeline.stage(q, n, fuel)?;
        self.memo.insert(key, s.clone());
        Ok(s)
    }

    fn expect(&mut self, claim: u32, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(Violation { claim, tie: false, detail: what() });
        }
    }

    /// `v < bound`
    fn expect_lt(&mut self, claim: u32, v: &Rational, bound: &Rational, what: impl FnOnce() -> String) {
        self.checked += 1;
        if v >= bound {
            self.violations.push(Violation { claim, tie: v == bound, detail: what() });
        }
    }

    /// Violations other than exact ties of the given claim.
    pub fn violations_besides_ties_of(&self, claim: u32) -> Vec<&Violation> {
        self.violations.iter().filter(|v| !(v.claim == claim && v.tie)).collect()
    }

    /// `alpha - v < c (beta - q)`: `Some(false)` only for a certain violation.
    fn solovay_gap(&self, v: &Rational, q: &Rational) -> Option<bool> {
        let c = &self.pipeline.config.c;
        let a = self.alpha.enclosure(self.depth);
        let b = self.beta.enclosure(self.depth);
        let (a_hi, b_hi) = (a.hi?, b.hi?);
        if &a_hi - v < c * (&b.lo - q) {
            Some(true)
        } else if &a.lo - v >= c * (b_hi - q) {
            Some(false)
        } else {
            None
        }
    }

    /// `v < alpha + 2^-(n-K-1)`, certified.
    fn near_alpha(&self, v: &Rational, n: usize) -> Option<bool> {
        let k = self.pipeline.config.k as i64;
        let a = self.alpha.enclosure(self.depth);
        let slack = pow2(-(n as i64 - k - 1));
        if v < &(&a.lo + &slack) {
            Some(true)
        } else {
            a.hi.map(|h| v < &(h + slack)).filter(|ok| !ok)
        }
    }

    fn certified(&mut self, claim: u32, verdict: Option<bool>, what: impl FnOnce() -> String) {
        match verdict {
            Some(ok) => self.expect(claim, ok, what),
            None => self.uncertified += 1,
        }
    }

    /// All properties on `(p, q, m, n)`; `p < q`, `m < n`.
    pub fn check(&mut self, p: &Rational, q: &Rational, m: usize, n: usize, fuel: &mut Fuel) -> Result<(), PipelineError> {
        assert!(p < q && m < n, "tuple must have p < q and m < n");
        let k = self.pipeline.config.k as i64;
        let d = self.pipeline.config.d.clone();
        let sq = self.stage(q, n, fuel)?;
        let sp = self.stage(p, n, fuel)?;
        let sm = self.stage(q, m, fuel)?;
        let t = format!("p={} q={} m={m} n={n}", fmt_rational(p), fmt_rational(q));

        self.expect(15, subset(&sp.chain.values, &sq.chain.values), || format!("P(p,n) not inside P(q,n) at {t}"));
        self.expect(16, subset(&sm.chain.values, &sq.chain.values), || format!("P(q,m) not inside P(q,n) at {t}"));
        let df = &sm.f - &sq.f;
        self.expect(16, !df.is_negative(), || format!("f(q,m) - f(q,n) = {} at {t}", fmt_rational(&df)));
        self.expect_lt(16, &df, &pow2(-(m as i64 - k)), || format!("f(q,m) - f(q,n) = {} at {t}", fmt_rational(&df)));
        let lip = &sq.f - &sp.f;
        self.expect_lt(17, &lip, &(&d * (q - p)), || format!("f(q,n) - f(p,n) = {} at {t}", fmt_rational(&lip)));

        for s in [&sq, &sp, &sm] {
            self.expect(21, s.ftilde >= s.f, || format!("ft < f at q={} n={}", fmt_rational(&s.q), s.n));
        }
        let dt = (&sq.ftilde - &sm.ftilde).abs();
        self.expect_lt(22, &dt, &pow2(-(m as i64 - k - 1)), || format!("|ft(q,n) - ft(q,m)| = {} at {t}", fmt_rational(&dt)));
        let dp = (&sq.ftilde - &sp.ftilde).abs();
        let bound = pow2(-(n as i64 - k)) + &d * (q - p);
        self.expect_lt(23, &dp, &bound, || format!("|ft(q,n) - ft(p,n)| = {} at {t}", fmt_rational(&dp)));

        for s in [sq, sp, sm] {
            let w = pow2(-(s.n as i64));
            if self.beta.below(&(&s.q - &w), self.depth) == Tri::Yes {
                for (name, v) in [("f", &s.f), ("ft", &s.ftilde)] {
                    let verdict = self.near_alpha(v, s.n);
                    self.certified(if name == "f" { 14 } else { 20 }, verdict, || format!("{name}(q,n) = {} not below alpha + 2^-(n-K-1) at q={} n={}", fmt_rational(v), fmt_rational(&s.q), s.n));
                }
            }
            if self.beta.below(&s.q, self.depth) == Tri::Yes {
                for (name, v) in [("f", &s.f), ("ft", &s.ftilde)] {
                    let verdict = self.solovay_gap(v, &s.q);
                    self.certified(if name == "f" { 18 } else { 24 }, verdict, || format!("alpha - {name}(q,n) too large at q={} n={}", fmt_rational(&s.q), s.n));
                }
            }
        }
        Ok(())
    }
}
