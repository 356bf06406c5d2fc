//! Translation-function representations and finite-depth checkers for
//! Solovay reducibility and its monotone, total, real, cl-open and cl-local
//! variants.
//!
//! Checkers only falsify: a pass means "no counterexample among the samples
//! at this depth", never a proof of reducibility.

mod check;
mod domain;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::constructions::PairedApproximations;
use crate::kernel::{
    canonical_index, fmt_rational, in_unit_interval, pow2, EffectiveApprox, Fuel, LeftCEApprox, OutOfFuel, Rational,
};
use crate::type2::RFunctionMachine;

pub use check::{
    check_lipschitz_q, check_monotone, check_r_witness, check_solovay_condition, convergence_diagnostic, sample_points,
    CheckReport, Monotonicity, TrendReport, Verdict,
};
pub use domain::DomainEnumerator;

/// Three-valued answer to "is q < x?" at finite depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// Base order used when a witness domain has to be enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseOrder {
    Canonical,
    Dyadic,
}

#[derive(Debug, Clone)]
pub enum QRule {
    /// Finite partial map; enumeration follows table order.
    Table(Vec<(Rational, Rational)>),
    Affine { offset: Rational, slope: Rational },
    Constant(Rational),
    /// Piecewise-linear interpolation over the `b`-breakpoints of paired approximations.
    Interp(PairedApproximations),
    /// `q -> a_{min{m : b_m >= q}}`
    StepBackward { a: LeftCEApprox, b: LeftCEApprox },
    /// `q -> b_{min{m : a_m >= q}}`
    StepForward { a: LeftCEApprox, b: LeftCEApprox },
    /// `q_n -> 1 - 2^-2n` over the canonical enumeration.
    Prop4,
}

#[derive(Debug, Clone)]
pub enum DomainBound {
    One,
    Rational(Rational),
    /// Limit of a left-c.e. stream, open at the limit.
    Limit(LeftCEApprox),
}

/// A partial translation function on rationals with its Solovay constant.
#[derive(Debug, Clone)]
pub struct QWitness {
    pub label: String,
    pub rule: QRule,
    pub constant_c: Rational,
    pub domain_bound: DomainBound,
    pub base: BaseOrder,
    pub monotone: bool,
    pub total: bool,
}

impl QWitness {
    pub fn new(label: impl Into<String>, rule: QRule, constant_c: Rational) -> Self {
        let (domain_bound, monotone, total) = match &rule {
            QRule::Table(_) => (DomainBound::One, false, false),
            QRule::Affine { slope, .. } => (DomainBound::One, !slope.is_negative_value(), true),
            QRule::Constant(_) => (DomainBound::One, true, true),
            QRule::Interp(p) => (DomainBound::Limit(p.b().clone()), true, false),
            QRule::StepBackward { b, .. } => (DomainBound::Limit(b.clone()), true, false),
            QRule::StepForward { a, .. } => (DomainBound::Limit(a.clone()), true, false),
            QRule::Prop4 => (DomainBound::One, false, true),
        };
        let base = match rule {
            QRule::Prop4 => BaseOrder::Canonical,
            _ => BaseOrder::Dyadic,
        };
        QWitness { label: label.into(), rule, constant_c, domain_bound, base, monotone, total }
    }

    pub fn with_base(mut self, base: BaseOrder) -> Self {
        self.base = base;
        self
    }

    /// `Ok(None)` means known to be undefined; `Err` means the search ran out of fuel.
    pub fn eval(&self, q: &Rational, fuel: &mut Fuel) -> Result<Option<Rational>, OutOfFuel> {
        fuel.burn(1)?;
        if !in_unit_interval(q) {
            return Ok(None);
        }
        match &self.rule {
            QRule::Table(t) => Ok(t.iter().find(|(x, _)| x == q).map(|(_, y)| y.clone())),
            QRule::Affine { offset, slope } => Ok(Some(offset + slope * q)),
            QRule::Constant(r) => Ok(Some(r.clone())),
            QRule::Interp(p) => p.interpolate(q, fuel),
            QRule::StepBackward { a, b } => step_lookup(b, a, q, fuel),
            QRule::StepForward { a, b } => step_lookup(a, b, q, fuel),
            QRule::Prop4 => {
                let den: u64 = q.denom().try_into().map_err(|_| OutOfFuel)?;
                fuel.burn(den)?;
                let n = canonical_index(q).ok_or(OutOfFuel)?;
                Ok(Some(Rational::one() - pow2(-2 * n as i64)))
            }
        }
    }

    /// Whether `q` is certainly in the domain, judged from stage `depth`.
    pub fn in_domain(&self, q: &Rational, depth: usize) -> Tri {
        if !in_unit_interval(q) {
            return Tri::No;
        }
        match &self.rule {
            QRule::Table(t) => {
                if t.iter().any(|(x, _)| x == q) {
                    Tri::Yes
                } else {
                    Tri::No
                }
            }
            QRule::Interp(p) => stream_region(p.b(), q, depth, false),
            QRule::StepBackward { b, .. } => stream_region(b, q, depth, true),
            QRule::StepForward { a, .. } => stream_region(a, q, depth, true),
            _ => Tri::Yes,
        }
    }

    /// Table keys, breakpoints and other points the witness itself singles out.
    pub fn distinguished_points(&self, depth: usize) -> Vec<Rational> {
        match &self.rule {
            QRule::Table(t) => t.iter().map(|(x, _)| x.clone()).collect(),
            QRule::Interp(p) => p.b().prefix(depth).unwrap_or_default(),
            QRule::StepBackward { b, .. } => b.prefix(depth).unwrap_or_default(),
            QRule::StepForward { a, .. } => a.prefix(depth).unwrap_or_default(),
            _ => Vec::new(),
        }
    }

    pub fn domain_enumerator(&self) -> DomainEnumerator {
        DomainEnumerator::new(self)
    }

    pub fn describe(&self) -> String {
        let rule = match &self.rule {
            QRule::Table(t) => format!("table({} entries)", t.len()),
            QRule::Affine { offset, slope } => format!("affine {} {}", fmt_rational(offset), fmt_rational(slope)),
            QRule::Constant(r) => format!("constant {}", fmt_rational(r)),
            QRule::Interp(p) => format!("interp {} over {} d={}", p.a().label(), p.b().label(), fmt_rational(p.d())),
            QRule::StepBackward { a, b } => format!("step-backward {} over {}", a.label(), b.label()),
            QRule::StepForward { a, b } => format!("step-forward {} over {}", b.label(), a.label()),
            QRule::Prop4 => "prop4".into(),
        };
        format!("{} [{}] c={}", self.label, rule, fmt_rational(&self.constant_c))
    }
}

trait NegativeValue {
    fn is_negative_value(&self) -> bool;
}

impl NegativeValue for Rational {
    fn is_negative_value(&self) -> bool {
        self < &Rational::zero()
    }
}

fn stream_region(s: &LeftCEApprox, q: &Rational, depth: usize, inclusive: bool) -> Tri {
    if let Ok(t) = s.term(depth) {
        if q < &t || (inclusive && q == &t) {
            return Tri::Yes;
        }
    }
    match s.known_limit() {
        Some(lim) if q >= &lim => Tri::No,
        _ => Tri::Unknown,
    }
}

/// `target_{min{m : key_m >= q}}`.
fn step_lookup(key: &LeftCEApprox, target: &LeftCEApprox, q: &Rational, fuel: &mut Fuel) -> Result<Option<Rational>, OutOfFuel> {
    let mut m = 0;
    loop {
        fuel.burn(1)?;
        let k = key.term(m).map_err(|_| OutOfFuel)?;
        if &k >= q {
            return target.term(m).map(Some).map_err(|_| OutOfFuel);
        }
        m += 1;
    }
}

#[derive(Debug, Clone)]
pub enum Lower {
    LeftCE(LeftCEApprox),
    Effective(EffectiveApprox),
    None,
}

/// Certified bounds `lo <= x <= hi` at some depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Option<Rational>,
}

/// A named real: an approximation stream plus whatever exact knowledge exists.
#[derive(Debug, Clone)]
pub struct RealName {
    pub label: String,
    pub lower: Lower,
    pub exact: Option<Rational>,
}

impl RealName {
    /// Exact values may be `1`, the one real outside `[0,1)` the constructions need.
    pub fn exact(label: impl Into<String>, q: Rational) -> Self {
        RealName { label: label.into(), lower: Lower::None, exact: Some(q) }
    }

    pub fn leftce(label: impl Into<String>, a: LeftCEApprox) -> Self {
        let exact = a.known_limit();
        RealName { label: label.into(), lower: Lower::LeftCE(a), exact }
    }

    pub fn effective(label: impl Into<String>, e: EffectiveApprox) -> Self {
        RealName { label: label.into(), lower: Lower::Effective(e), exact: None }
    }

    /// Drops exact knowledge, leaving only what the stream certifies.
    pub fn without_exact(mut self) -> Self {
        self.exact = None;
        self
    }

    pub fn enclosure(&self, depth: usize) -> Enclosure {
        if let Some(x) = &self.exact {
            return Enclosure { lo: x.clone(), hi: Some(x.clone()) };
        }
        match &self.lower {
            Lower::LeftCE(a) => {
                let lo = last_available(|k| a.term(k).ok(), depth).unwrap_or_else(Rational::zero);
                Enclosure { lo, hi: a.upper_bound(depth) }
            }
            Lower::Effective(e) => match (0..=depth).rev().find_map(|k| e.term(k).ok().map(|q| (k, q))) {
                Some((k, q)) => {
                    let r = pow2(1 - k as i64);
                    Enclosure { lo: &q - &r, hi: Some(q + r) }
                }
                None => Enclosure { lo: Rational::zero(), hi: Some(Rational::one()) },
            },
            Lower::None => Enclosure { lo: Rational::zero(), hi: Some(Rational::one()) },
        }
    }

    /// Is `q < x`? Decided soundly from the enclosure at `depth`.
    pub fn below(&self, q: &Rational, depth: usize) -> Tri {
        let e = self.enclosure(depth);
        if q < &e.lo {
            Tri::Yes
        } else if e.hi.as_ref().is_some_and(|h| q >= h) {
            Tri::No
        } else {
            Tri::Unknown
        }
    }

    /// Point estimate: exact, else enclosure midpoint, else the lower bound.
    pub fn best(&self, depth: usize) -> Rational {
        if let Some(x) = &self.exact {
            return x.clone();
        }
        let e = self.enclosure(depth);
        match e.hi {
            Some(h) => (e.lo + h) / Rational::from_integer(2.into()),
            None => e.lo,
        }
    }

    /// Lower approximations up to `depth`, used as sample points.
    pub fn lower_prefix(&self, depth: usize) -> Vec<Rational> {
        match &self.lower {
            Lower::LeftCE(a) => (0..depth).map_while(|k| a.term(k).ok()).collect(),
            Lower::Effective(e) => (0..depth).map_while(|k| e.term(k).ok()).collect(),
            Lower::None => Vec::new(),
        }
    }
}

fn last_available<F: Fn(usize) -> Option<Rational>>(f: F, depth: usize) -> Option<Rational> {
    (0..=depth).rev().find_map(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RKind {
    /// Translation into `[0, alpha)` on `[0, beta)`.
    Real,
    /// Weak translation on `[0, beta)`.
    ClOpen,
    /// Computable on `[0, bound)` with `bound > beta`.
    ClLocal { bound: Rational },
}

impl fmt::Display for RKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RKind::Real => f.write_str("real"),
            RKind::ClOpen => f.write_str("cl-open"),
            RKind::ClLocal { bound } => write!(f, "cl-local<{}", fmt_rational(bound)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RWitness {
    pub label: String,
    pub machine: RFunctionMachine,
    pub constant_c: Rational,
    pub kind: RKind,
}

impl RWitness {
    pub fn new(label: impl Into<String>, machine: RFunctionMachine, constant_c: Rational, kind: RKind) -> Self {
        RWitness { label: label.into(), machine, constant_c, kind }
    }
}

/// Constant machine, cl-local on the whole unit interval.
pub fn make_constant_witness(alpha: Rational) -> RWitness {
    RWitness::new(
        format!("const {}", fmt_rational(&alpha)),
        RFunctionMachine::constant(alpha),
        Rational::one(),
        RKind::ClLocal { bound: Rational::one() },
    )
}

/// Sorted, deduplicated union of point sets.
pub(crate) fn merge_points(sets: impl IntoIterator<Item = Vec<Rational>>) -> Vec<Rational> {
    let mut m: BTreeMap<Rational, ()> = BTreeMap::new();
    for s in sets {
        for q in s {
            m.insert(q, ());
        }
    }
    m.into_keys().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat, StreamRule};
    use crate::type2::query_constant;

    #[test]
    fn constant_witnesses() {
        for a in [rat(1, 3), int(0), rat(63, 64)] {
            let w = make_constant_witness(a.clone());
            let b = crate::kernel::Budget::new(100, 4, 4).unwrap();
            assert_eq!(query_constant(&w.machine, &rat(1, 2), 4, &b).ok(), Some(&a));
            assert_eq!(w.constant_c, int(1));
            assert!(matches!(w.kind, RKind::ClLocal { .. }));
        }
    }

    #[test]
    fn enclosures_are_sound() {
        let a = LeftCEApprox::from_rule("a", StreamRule::Lacunary { base: 2 });
        let x = RealName::leftce("x", a.clone());
        let far = a.term(8).unwrap();
        for d in 0..6 {
            let e = x.enclosure(d);
            assert!(e.lo <= far && &far <= e.hi.as_ref().unwrap());
        }
        assert_eq!(x.below(&int(0), 3), Tri::Yes);
        assert_eq!(x.below(&rat(9, 10), 3), Tri::No);

        let half = EffectiveApprox::from_fn("h", |k| Some(rat(1, 2) - pow2(-(k as i64) - 1)));
        let y = RealName::effective("y", half);
        let e = y.enclosure(5);
        assert!(e.lo < rat(1, 2) && rat(1, 2) < e.hi.unwrap());
        assert_eq!(y.below(&rat(1, 2), 5), Tri::Unknown);
    }

    #[test]
    fn step_witness_values() {
        let a = LeftCEApprox::from_terms("a", vec![int(0), rat(1, 4), rat(1, 2), rat(5, 8)]);
        let b = LeftCEApprox::from_terms("b", vec![int(0), rat(3, 10), rat(3, 5), rat(7, 10)]);
        let g = QWitness::new("g", QRule::StepBackward { a, b }, int(1));
        let mut f = Fuel::new(100);
        assert_eq!(g.eval(&rat(2, 5), &mut f).unwrap(), Some(rat(1, 2)));
        assert_eq!(g.eval(&int(0), &mut f).unwrap(), Some(int(0)));
        assert_eq!(g.eval(&rat(9, 10), &mut f), Err(OutOfFuel));
    }

    #[test]
    fn prop4_values() {
        let g = QWitness::new("p4", QRule::Prop4, int(1));
        let mut f = Fuel::new(1000);
        assert_eq!(g.eval(&rat(1, 3), &mut f).unwrap(), Some(rat(63, 64)));
        assert_eq!(g.eval(&int(0), &mut f).unwrap(), Some(rat(3, 4)));
        assert_eq!(g.eval(&rat(1, 2), &mut f).unwrap(), Some(rat(15, 16)));
    }
}
