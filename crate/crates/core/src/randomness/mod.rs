//! Solovay tests and the transformers carrying a test failing on `beta` to
//! one failing on `alpha` along a Lipschitz real witness.
//!
//! A test is produced index by index; "fails on x" is only ever reported as a
//! hit count at finite depth.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::kernel::{fmt_rational, pow2, Budget, Interval, LeftCEApprox, Rational};
use crate::type2::{query_constant, QueryStatus, ToleranceResult};
use crate::witnesses::{RKind, RWitness, RealName};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RandomnessError {
    #[error("ratio must lie strictly between 0 and 1, got {0}")]
    Ratio(String),
    #[error("width must be nonnegative, got {0}")]
    Width(String),
    #[error("the total transformer needs a test with computable measure")]
    NotComputableMeasure,
    #[error("the total transformer needs a cl-local witness, got {0}")]
    NotLocal(String),
    #[error("rho = {rho} is not below the witness domain bound {bound}")]
    RhoNotBelowBound { rho: String, bound: String },
}

type IntervalFn = Arc<dyn Fn(usize) -> Option<Interval> + Send + Sync>;
type TailFn = Arc<dyn Fn(usize) -> Rational + Send + Sync>;

/// How the total measure is known.
#[derive(Clone)]
pub enum MeasureKind {
    /// Partial sums stay below the declared bound.
    FiniteBound,
    /// The declared bound is the exact total; `tail(N)` bounds `sum_{n>N} d_n`.
    Computable { tail: TailFn },
}

/// Intervals `S_n = [l_n, r_n]` of length `d_n`.
#[derive(Clone)]
pub struct SolovayTest {
    pub label: String,
    intervals: IntervalFn,
    pub kind: MeasureKind,
    pub declared_bound: Rational,
}

impl fmt::Debug for SolovayTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SolovayTest({}, bound {})", self.label, fmt_rational(&self.declared_bound))
    }
}

impl SolovayTest {
    pub fn from_fn<F>(label: impl Into<String>, f: F, kind: MeasureKind, declared_bound: Rational) -> Self
    where
        F: Fn(usize) -> Option<Interval> + Send + Sync + 'static,
    {
        SolovayTest { label: label.into(), intervals: Arc::new(f), kind, declared_bound }
    }

    /// A finite list; its measure is the exact sum.
    pub fn finite(label: impl Into<String>, list: Vec<Interval>) -> Self {
        let total = list.iter().fold(Rational::zero(), |acc, i| acc + i.measure());
        let kind = MeasureKind::Computable { tail: Arc::new(|_| Rational::zero()) };
        SolovayTest::from_fn(label, move |n| list.get(n).cloned(), kind, total)
    }

    /// `S_n = [x_n, x_n + w r^n]` along a left-c.e. stream, total measure `w / (1 - r)`.
    pub fn following(label: impl Into<String>, stream: LeftCEApprox, width: Rational, ratio: Rational) -> Result<Self, RandomnessError> {
        if ratio <= Rational::zero() || ratio >= Rational::one() {
            return Err(RandomnessError::Ratio(fmt_rational(&ratio)));
        }
        if width < Rational::zero() {
            return Err(RandomnessError::Width(fmt_rational(&width)));
        }
        let total = &width / (Rational::one() - &ratio);
        let (w, r) = (width.clone(), ratio.clone());
        let tail_total = total.clone();
        let tail: TailFn = Arc::new(move |n| &tail_total * power(&ratio, n + 1));
        Ok(SolovayTest::from_fn(
            label,
            move |n| {
                let x = stream.term(n).ok()?;
                let hi = &x + &w * power(&r, n);
                Interval::new(x, hi).ok()
            },
            MeasureKind::Computable { tail },
            total,
        ))
    }

    /// Keeps the declared bound but forgets the tail certificate.
    pub fn with_finite_bound(mut self) -> Self {
        self.kind = MeasureKind::FiniteBound;
        self
    }

    pub fn interval(&self, n: usize) -> Option<Interval> {
        (self.intervals)(n)
    }

    /// `S_0, ..., S_{depth-1}`, stopping at the first index not produced.
    pub fn produced(&self, depth: usize) -> Vec<Interval> {
        (0..depth).map_while(|n| self.interval(n)).collect()
    }

    pub fn partial_measure(&self, depth: usize) -> Rational {
        self.produced(depth).iter().fold(Rational::zero(), |acc, i| acc + i.measure())
    }

    /// Bound on `sum_{n>N} d_n`, when certified.
    pub fn tail(&self, n: usize) -> Option<Rational> {
        match &self.kind {
            MeasureKind::FiniteBound => None,
            MeasureKind::Computable { tail } => Some(tail(n)),
        }
    }

    pub fn is_total(&self) -> bool {
        matches!(self.kind, MeasureKind::Computable { .. })
    }
}

fn power(r: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * r)
}

/// `g(q, m)`: the witness machine on the constant oracle `q` with tolerance `2^-m`.
pub fn tolerance_query_g(w: &RWitness, q: &Rational, m: usize, b: &Budget) -> ToleranceResult {
    query_constant(&w.machine, q, m + 1, b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryStatus {
    Defined(Interval),
    /// The machine halted without output: `T_n` does not exist.
    Undefined,
    /// Fuel ran out before the machine answered.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformedEntry {
    pub n: usize,
    /// The source interval after any truncation.
    pub source: Interval,
    pub g: Option<Rational>,
    pub status: EntryStatus,
}

impl TransformedEntry {
    pub fn interval(&self) -> Option<&Interval> {
        match &self.status {
            EntryStatus::Defined(i) => Some(i),
            _ => None,
        }
    }
}

/// `T_n = [g(l_n,n) - (c d_n + 2^-n), g(l_n,n) + (c d_n + 2^-n)]` for the produced `n`.
#[derive(Debug, Clone)]
pub struct TransformedTest {
    pub label: String,
    pub c: Rational,
    pub entries: Vec<TransformedEntry>,
    /// `4 + 2cL` with `L` the source bound.
    pub declared_bound: Rational,
    /// Measure removed from the source by truncation, over the produced indices.
    pub truncated_away: Rational,
    /// Source tail bound after the last produced index, when certified.
    source_tail: Option<Rational>,
}

/// Radius `c d + 2^-n`.
pub fn transformed_radius(c: &Rational, d: &Rational, n: usize) -> Rational {
    c * d + pow2(-(n as i64))
}

/// `4 + 2cL`
pub fn transformed_bound(c: &Rational, l: &Rational) -> Rational {
    Rational::from_integer(4.into()) + Rational::from_integer(2.into()) * c * l
}

fn transform_entry(w: &RWitness, n: usize, source: Interval, b: &Budget) -> TransformedEntry {
    let r = tolerance_query_g(w, source.lo(), n, b);
    let status = match (&r.status, &r.value) {
        (QueryStatus::Ok, Some(v)) => {
            let radius = transformed_radius(&w.constant_c, &source.measure(), n);
            EntryStatus::Defined(Interval::around(v, &radius).expect("nonnegative radius"))
        }
        (QueryStatus::FuelExhausted, _) => EntryStatus::Unknown,
        _ => EntryStatus::Undefined,
    };
    TransformedEntry { n, source, g: r.ok().cloned(), status }
}

/// Transforms the first `b.depth` intervals of `s` along `w` (constant `c = w.constant_c`).
pub fn transform_test(s: &SolovayTest, w: &RWitness, b: &Budget) -> TransformedTest {
    let entries: Vec<TransformedEntry> =
        s.produced(b.depth).into_iter().enumerate().map(|(n, i)| transform_entry(w, n, i, b)).collect();
    let source_tail = entries.len().checked_sub(1).and_then(|n| s.tail(n));
    TransformedTest {
        label: format!("T({},{})", s.label, w.label),
        c: w.constant_c.clone(),
        entries,
        declared_bound: transformed_bound(&w.constant_c, &s.declared_bound),
        truncated_away: Rational::zero(),
        source_tail,
    }
}

/// Replaces each `S_n` by `S_n ∩ [0, rho]` and transforms. An intersection
/// that is empty becomes the degenerate interval `[0,0]`, so every index keeps
/// an entry of measure `2^-n+1` and the total stays `4 + 2c L_comp`.
pub fn transform_total_test(s: &SolovayTest, w: &RWitness, rho: &Rational, b: &Budget) -> Result<TransformedTest, RandomnessError> {
    let RKind::ClLocal { bound } = &w.kind else {
        return Err(RandomnessError::NotLocal(w.kind.to_string()));
    };
    if rho >= bound {
        return Err(RandomnessError::RhoNotBelowBound { rho: fmt_rational(rho), bound: fmt_rational(bound) });
    }
    if !s.is_total() {
        return Err(RandomnessError::NotComputableMeasure);
    }
    let window = Interval::new(Rational::zero(), rho.clone()).map_err(|_| RandomnessError::RhoNotBelowBound {
        rho: fmt_rational(rho),
        bound: fmt_rational(bound),
    })?;
    let mut removed = Rational::zero();
    let mut entries = Vec::new();
    for (n, i) in s.produced(b.depth).into_iter().enumerate() {
        let cut = i.intersect(&window).unwrap_or_else(|| Interval::point(Rational::zero()));
        removed += i.measure() - cut.measure();
        entries.push(transform_entry(w, n, cut, b));
    }
    let source_tail = entries.len().checked_sub(1).and_then(|n| s.tail(n));
    Ok(TransformedTest {
        label: format!("T({}∩[0,{}],{})", s.label, fmt_rational(rho), w.label),
        c: w.constant_c.clone(),
        entries,
        declared_bound: transformed_bound(&w.constant_c, &(&s.declared_bound - &removed)),
        truncated_away: removed,
        source_tail,
    })
}

/// One row of measure bookkeeping: the partial measure through index `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureRow {
    pub n: usize,
    pub partial: Rational,
    pub bound: Rational,
}

impl TransformedTest {
    pub fn defined(&self) -> impl Iterator<Item = &Interval> {
        self.entries.iter().filter_map(|e| e.interval())
    }

    pub fn undefined_count(&self) -> usize {
        self.entries.iter().filter(|e| e.status == EntryStatus::Undefined).count()
    }

    pub fn unknown_count(&self) -> usize {
        self.entries.iter().filter(|e| e.status == EntryStatus::Unknown).count()
    }

    pub fn partial_measure(&self) -> Rational {
        self.defined().fold(Rational::zero(), |acc, i| acc + i.measure())
    }

    /// Cumulative measure after each produced index, against the declared bound.
    pub fn accounting(&self) -> Vec<MeasureRow> {
        let mut partial = Rational::zero();
        self.entries
            .iter()
            .map(|e| {
                if let Some(i) = e.interval() {
                    partial += i.measure();
                }
                MeasureRow { n: e.n, partial: partial.clone(), bound: self.declared_bound.clone() }
            })
            .collect()
    }

    /// Every defined `T_n` has measure exactly `2(c d_n + 2^-n)`.
    pub fn measures_exact(&self) -> bool {
        self.entries.iter().all(|e| match e.interval() {
            Some(i) => i.measure() == Rational::from_integer(2.into()) * transformed_radius(&self.c, &e.source.measure(), e.n),
            None => true,
        })
    }

    /// Certified enclosure `[lo, hi]` of the full-series measure minus the
    /// partial measure, when every entry is defined and the source tail is
    /// certified: `2^-N+1 <= gap <= 2^-N+1 + 2c tail(N)` with `N` the last index.
    pub fn remaining_measure(&self) -> Option<(Rational, Rational)> {
        let tail = self.source_tail.as_ref()?;
        if self.entries.iter().any(|e| e.interval().is_none()) {
            return None;
        }
        let last = self.entries.len().checked_sub(1)?;
        let geometric = pow2(1 - last as i64);
        let hi = &geometric + Rational::from_integer(2.into()) * &self.c * tail;
        Some((geometric, hi))
    }
}

/// Position of an interval relative to a named real at some depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hit {
    Hit,
    Miss,
    Unknown,
    /// No interval at this index.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitReport {
    pub label: String,
    pub real: String,
    pub per_index: Vec<Hit>,
}

impl HitReport {
    pub fn count(&self, h: Hit) -> usize {
        self.per_index.iter().filter(|x| **x == h).count()
    }

    pub fn hits(&self) -> Vec<usize> {
        self.per_index.iter().enumerate().filter(|(_, h)| **h == Hit::Hit).map(|(n, _)| n).collect()
    }
}

impl fmt::Display for HitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {} hits={} misses={} unknowns={} absent={}",
            self.label,
            self.real,
            self.count(Hit::Hit),
            self.count(Hit::Miss),
            self.count(Hit::Unknown),
            self.count(Hit::Absent)
        )
    }
}

/// Hit if `x`'s enclosure lies inside `i` widened by `slack`, miss if it lies
/// outside `i`, unknown otherwise.
pub fn locate(i: &Interval, x: &RealName, depth: usize, slack: &Rational) -> Hit {
    let e = x.enclosure(depth);
    let wide = i.widen(slack);
    match &e.hi {
        Some(hi) if wide.lo() <= &e.lo && hi <= wide.hi() => Hit::Hit,
        Some(hi) if hi < i.lo() => Hit::Miss,
        _ if &e.lo > i.hi() => Hit::Miss,
        _ => Hit::Unknown,
    }
}

/// Anything producing an optional interval per index.
pub trait IntervalFamily {
    fn label(&self) -> &str;
    fn family(&self, depth: usize) -> Vec<Option<Interval>>;
}

impl IntervalFamily for SolovayTest {
    fn label(&self) -> &str {
        &self.label
    }

    fn family(&self, depth: usize) -> Vec<Option<Interval>> {
        self.produced(depth).into_iter().map(Some).collect()
    }
}

impl IntervalFamily for TransformedTest {
    fn label(&self) -> &str {
        &self.label
    }

    fn family(&self, depth: usize) -> Vec<Option<Interval>> {
        self.entries.iter().take(depth).map(|e| e.interval().cloned()).collect()
    }
}

/// Counts the produced indices whose interval certifiably contains `x`.
pub fn check_fails_on(t: &impl IntervalFamily, x: &RealName, b: &Budget) -> HitReport {
    check_fails_on_with_slack(t, x, b, &Rational::zero())
}

pub fn check_fails_on_with_slack(t: &impl IntervalFamily, x: &RealName, b: &Budget, slack: &Rational) -> HitReport {
    let per_index = t
        .family(b.depth)
        .into_iter()
        .map(|i| match i {
            Some(i) => locate(&i, x, b.depth, slack),
            None => Hit::Absent,
        })
        .collect();
    HitReport { label: t.label().to_string(), real: x.label.clone(), per_index }
}

/// Source hits on `beta` with a defined `T_n` that are not hits on `alpha`
/// within the checker slack `2^-(depth-2)`.
pub fn unpropagated_hits(source: &SolovayTest, t: &TransformedTest, beta: &RealName, alpha: &RealName, b: &Budget) -> Vec<usize> {
    let slack = pow2(2 - b.depth as i64);
    let src = check_fails_on(source, beta, b);
    let dst = check_fails_on_with_slack(t, alpha, b, &slack);
    src.hits()
        .into_iter()
        .filter(|&n| t.entries.get(n).is_some_and(|e| e.interval().is_some()))
        .filter(|&n| dst.per_index.get(n) != Some(&Hit::Hit))
        .collect()
}

#[cfg(test)]
mod tests;
