//! Witness builders and left-c.e. extraction procedures.
//!
//! Extractions are step-wise searches; each one runs under a single fuel
//! meter and returns the prefix found so far together with a completeness
//! flag, so a run that starves is reported rather than hidden.

mod prop4;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::kernel::{fmt_rational, pow2, Budget, Fuel, KernelError, LeftCEApprox, OutOfFuel, Rational};
use crate::type2::{Breakpoints, Outcome, PiecewiseLinear, RFunctionMachine};
use crate::witnesses::{QRule, QWitness, RKind, RWitness};

pub use prop4::{build_prop4_instance, partial_measure, test_interval, Prop4Instance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("pairing inequality a_(n+1) - a_n < d (b_(n+1) - b_n) fails at n = {index}")]
    Pairing { index: usize },
    #[error("pairing constant must be positive")]
    NonPositiveConstant,
    #[error("bisection could not avoid the intervals at depth {depth}")]
    AvoidanceFailed { depth: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Two left-c.e. approximations tied by `a_(n+1) - a_n < d (b_(n+1) - b_n)`.
#[derive(Debug, Clone)]
pub struct PairedApproximations {
    a: LeftCEApprox,
    b: LeftCEApprox,
    d: Rational,
}

impl PairedApproximations {
    /// Checks the pairing on the first `depth` steps; finite tables are
    /// checked to their end.
    pub fn new(a: LeftCEApprox, b: LeftCEApprox, d: Rational, depth: usize) -> Result<Self, ConstructionError> {
        if d <= Rational::zero() {
            return Err(ConstructionError::NonPositiveConstant);
        }
        let p = PairedApproximations { a, b, d };
        for n in 0..depth {
            match p.step_ok(n) {
                Ok(true) => {}
                Ok(false) => return Err(ConstructionError::Pairing { index: n }),
                Err(KernelError::StreamEnded { .. }) => break,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(p)
    }

    fn step_ok(&self, n: usize) -> Result<bool, KernelError> {
        let da = self.a.term(n + 1)? - self.a.term(n)?;
        let db = self.b.term(n + 1)? - self.b.term(n)?;
        Ok(da < &self.d * db)
    }

    pub fn a(&self) -> &LeftCEApprox {
        &self.a
    }

    pub fn b(&self) -> &LeftCEApprox {
        &self.b
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    /// Linear interpolation of `(b_n, a_n)`, equal to `a_0` below `b_0`.
    /// Needs breakpoints past `q`, so it runs out of fuel at and above `lim b`.
    pub fn interpolate(&self, q: &Rational, fuel: &mut Fuel) -> Result<Option<Rational>, OutOfFuel> {
        let term = |s: &LeftCEApprox, k: usize| s.term(k).map_err(|_| OutOfFuel);
        let b0 = term(&self.b, 0)?;
        if q < &b0 {
            return Ok(Some(term(&self.a, 0)?));
        }
        let mut n = 0;
        loop {
            fuel.burn(1)?;
            let b1 = term(&self.b, n + 1)?;
            if q < &b1 {
                let (bn, an, a1) = (term(&self.b, n)?, term(&self.a, n)?, term(&self.a, n + 1)?);
                if !self.step_ok(n).map_err(|_| OutOfFuel)? {
                    return Ok(None);
                }
                return Ok(Some(&an + (&a1 - &an) / (&b1 - &bn) * (q - &bn)));
            }
            n += 1;
        }
    }
}

/// Strictly increasing Lipschitz witness with constant `d`.
pub fn interp_q_witness(p: &PairedApproximations) -> QWitness {
    let mut w = QWitness::new(format!("interp({},{})", p.a.label(), p.b.label()), QRule::Interp(p.clone()), p.d.clone());
    w.monotone = true;
    w
}

/// Step witnesses built from two left-c.e. approximations starting at 0:
/// backward `q -> a_{min{m : b_m >= q}}`, forward `q -> b_{min{m : a_m >= q}}`.
pub fn monotone_from_leftce(a: &LeftCEApprox, b: &LeftCEApprox, direction: Direction) -> QWitness {
    let (label, rule) = match direction {
        Direction::Backward => (format!("step({}<-{})", a.label(), b.label()), QRule::StepBackward { a: a.clone(), b: b.clone() }),
        Direction::Forward => (format!("step({}<-{})", b.label(), a.label()), QRule::StepForward { a: a.clone(), b: b.clone() }),
    };
    QWitness::new(label, rule, Rational::one())
}

/// Result of an extraction: a strictly increasing prefix, and whether it
/// reached the requested length before fuel ran out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub prefix: Vec<Rational>,
    pub complete: bool,
}

impl Extraction {
    pub fn approx(&self, label: impl Into<String>) -> LeftCEApprox {
        LeftCEApprox::from_terms(label, self.prefix.clone())
    }
}

/// Left-c.e. prefix of length `b.depth` read off a monotone witness.
///
/// Forward: `g` goes from the real of `a` to the target; emits the strict
/// increases of `g(a_0), g(a_1), ...`.
/// Backward: `g` goes from the target to the real of `a`; runs the step-wise
/// index search over an enumeration `q_0 = 0, q_1, ...` of the domain.
pub fn leftce_from_monotone(w: &QWitness, a: &LeftCEApprox, direction: Direction, b: &Budget) -> Extraction {
    let mut fuel = b.meter();
    match direction {
        Direction::Forward => forward_monotone(w, a, b.depth, &mut fuel),
        Direction::Backward => backward_monotone(w, a, b.depth, &mut fuel),
    }
}

fn forward_monotone(w: &QWitness, a: &LeftCEApprox, len: usize, fuel: &mut Fuel) -> Extraction {
    let mut prefix: Vec<Rational> = Vec::new();
    let mut k = 0;
    while prefix.len() < len {
        let Ok(ak) = a.term(k) else { break };
        match w.eval(&ak, fuel) {
            Ok(Some(g)) => {
                if prefix.last().is_none_or(|last| &g > last) {
                    prefix.push(g);
                }
            }
            Ok(None) => {}
            Err(OutOfFuel) => break,
        }
        k += 1;
    }
    let complete = prefix.len() >= len;
    Extraction { prefix, complete }
}

fn backward_monotone(w: &QWitness, a: &LeftCEApprox, len: usize, fuel: &mut Fuel) -> Extraction {
    let mut dom = w.domain_enumerator();
    let mut values: Vec<Rational> = Vec::new();
    let mut prefix = Vec::new();
    if len == 0 {
        return Extraction { prefix, complete: true };
    }
    // i_0 = 0 and q_0 = 0
    let mut cur = 0usize;
    match dom.get(0, fuel) {
        Ok(q) => prefix.push(q),
        Err(_) => return Extraction { prefix, complete: false },
    }
    values.push(match w.eval(&prefix[0], fuel) {
        Ok(Some(g)) => g,
        _ => return Extraction { prefix, complete: false },
    });
    let mut stage = 1usize;
    // a_level <= a_stage, advanced only while something waits on it
    let mut level = 0usize;
    'steps: for n in 0..len.saturating_sub(1) {
        let Ok(a_n) = a.term(n) else { break 'steps };
        let q_cur = dom.prefix()[cur].clone();
        // Since a is increasing, "g(q_i) < a_j for some i_n < j <= stage" holds
        // once stage > i_n and g(q_i) < a_level. Indices passing the other two
        // conditions wait here until a_level overtakes them.
        let mut waiting: BinaryHeap<Reverse<(Rational, usize)>> = (0..values.len())
            .filter(|&i| dom.prefix()[i] > q_cur && values[i] > a_n)
            .map(|i| Reverse((values[i].clone(), i)))
            .collect();
        let mut ready: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        loop {
            if fuel.burn(1).is_err() {
                break 'steps;
            }
            if dom.extend_to(stage + 1, fuel).is_err() {
                break 'steps;
            }
            while values.len() <= stage {
                let i = values.len();
                let q = dom.prefix()[i].clone();
                match w.eval(&q, fuel) {
                    Ok(Some(g)) => {
                        if q > q_cur && g > a_n {
                            waiting.push(Reverse((g.clone(), i)));
                        }
                        values.push(g);
                    }
                    _ => break 'steps,
                }
            }
            if !waiting.is_empty() && ready.is_empty() && level < stage {
                level += 1;
            }
            if stage > cur {
                let Ok(a_top) = a.term(level) else { break 'steps };
                while waiting.peek().is_some_and(|Reverse((g, _))| g < &a_top) {
                    let Reverse((_, i)) = waiting.pop().expect("peeked");
                    ready.push(Reverse(i));
                }
                if let Some(Reverse(i)) = ready.pop() {
                    cur = i;
                    prefix.push(dom.prefix()[i].clone());
                    stage += 1;
                    continue 'steps;
                }
            }
            stage += 1;
        }
    }
    let complete = prefix.len() >= len;
    Extraction { prefix, complete }
}

/// R-witness interpolating the breakpoints `(b_n, a_n)`, equal to `a_0`
/// below `b_0`. `lipschitz` bounds every segment slope.
pub fn piecewise_linear_r(a: &LeftCEApprox, b: &LeftCEApprox, lipschitz: Rational) -> RWitness {
    let m = PiecewiseLinear::new(Breakpoints::Streams { a: a.clone(), b: b.clone() }, lipschitz.clone());
    RWitness::new(format!("pl({},{})", a.label(), b.label()), RFunctionMachine::new(m), lipschitz, RKind::Real)
}

/// Memoized machine results on constant oracles, keyed by point and
/// tolerance exponent. A query runs under a per-stage allowance charged to
/// the global meter; one that has not halted is retried at a later stage.
struct ValueCache<'a> {
    machine: &'a RFunctionMachine,
    values: HashMap<(Rational, usize), Option<Rational>>,
    tried: HashMap<(Rational, usize), u64>,
}

enum Probe {
    Value(Rational),
    Undefined,
    /// Not halted within the current allowance.
    Pending,
}

impl<'a> ValueCache<'a> {
    fn new(machine: &'a RFunctionMachine) -> Self {
        ValueCache { machine, values: HashMap::new(), tried: HashMap::new() }
    }

    /// Result with tolerance `2^-m`, i.e. output number `m + 1`.
    fn get(&mut self, x: &Rational, m: usize, allowance: u64, fuel: &mut Fuel) -> Result<Probe, OutOfFuel> {
        let key = (x.clone(), m);
        if let Some(v) = self.values.get(&key) {
            return Ok(v.clone().map_or(Probe::Undefined, Probe::Value));
        }
        if self.tried.get(&key).is_some_and(|t| *t >= allowance) {
            return Ok(Probe::Pending);
        }
        let mut local = Fuel::new(allowance.min(fuel.remaining()));
        let out = self.machine.eval_at(x, m + 1, &mut local);
        fuel.burn(allowance.min(fuel.remaining()) - local.remaining())?;
        match out {
            Outcome::Value(v) => {
                self.values.insert(key, Some(v.clone()));
                Ok(Probe::Value(v))
            }
            Outcome::Undefined => {
                self.values.insert(key, None);
                Ok(Probe::Undefined)
            }
            Outcome::Exhausted => {
                if fuel.remaining() == 0 {
                    return Err(OutOfFuel);
                }
                self.tried.insert(key, allowance);
                Ok(Probe::Pending)
            }
        }
    }
}

/// Per-query allowance: linear in the stage, doubled once for every earlier
/// stage in which some query ran out of it.
struct Schedule {
    stage: usize,
    effort: u32,
    blocked: bool,
}

impl Schedule {
    fn new() -> Self {
        Schedule { stage: 1, effort: 0, blocked: false }
    }

    fn allowance(&self) -> u64 {
        (32 * self.stage as u64).saturating_mul(1u64 << self.effort.min(40))
    }

    fn note(&mut self, p: &Probe) {
        if matches!(p, Probe::Pending) {
            self.blocked = true;
        }
    }

    fn advance(&mut self) {
        self.stage += 1;
        if std::mem::take(&mut self.blocked) {
            self.effort += 1;
        }
    }
}

/// Left-c.e. prefix of length `b.depth` read off a nondecreasing R-witness.
///
/// Forward: the witness goes from the real of `a` to the target; each step
/// finds `m`, `i < j` with `f(a_i) + 2^-m < f(a_j) - 2^-m` at tolerance `2^-m`
/// and emits the approximation of `f(a_i)`.
/// Backward: the witness goes from the target to the real of `a`; each step
/// finds a rational `q` above the last emission, `m` and `j` satisfying both
/// tolerance gates, and emits `q`.
pub fn leftce_from_r(w: &RWitness, a: &LeftCEApprox, direction: Direction, b: &Budget) -> Extraction {
    let mut fuel = b.meter();
    match direction {
        Direction::Forward => forward_r(w, a, b.depth, &mut fuel),
        Direction::Backward => backward_r(w, a, b.depth, &mut fuel),
    }
}

fn forward_r(w: &RWitness, a: &LeftCEApprox, len: usize, fuel: &mut Fuel) -> Extraction {
    let mut cache = ValueCache::new(&w.machine);
    let mut prefix: Vec<Rational> = Vec::new();
    let (mut i_prev, mut m_prev): (Option<usize>, usize) = (None, 0);
    let mut sched = Schedule::new();
    'steps: while prefix.len() < len {
        loop {
            if fuel.burn(1).is_err() {
                break 'steps;
            }
            let (stage, allowance) = (sched.stage, sched.allowance());
            let i_lo = i_prev.map_or(0, |i| i + 1);
            // finer tolerances wait until every query at this one has halted
            for m in m_prev + 1..=stage {
                if sched.blocked {
                    break;
                }
                for i in i_lo..stage {
                    let Ok(ai) = a.term(i) else { break };
                    let fi = match cache.get(&ai, m, allowance, fuel) {
                        Ok(Probe::Value(v)) => v,
                        Ok(p) => {
                            sched.note(&p);
                            continue;
                        }
                        Err(_) => break 'steps,
                    };
                    if prefix.last().is_some_and(|last| &fi <= last) {
                        continue;
                    }
                    for j in i + 1..=stage {
                        if fuel.burn(1).is_err() {
                            break 'steps;
                        }
                        let Ok(aj) = a.term(j) else { break };
                        let fj = match cache.get(&aj, m, allowance, fuel) {
                            Ok(Probe::Value(v)) => v,
                            Ok(p) => {
                                sched.note(&p);
                                continue;
                            }
                            Err(_) => break 'steps,
                        };
                        let tol = pow2(-(m as i64));
                        if &fi + &tol < &fj - &tol {
                            prefix.push(fi);
                            i_prev = Some(i);
                            m_prev = m;
                            continue 'steps;
                        }
                    }
                }
            }
            sched.advance();
        }
    }
    let complete = prefix.len() >= len;
    Extraction { prefix, complete }
}

/// Candidates above `last` at stage `s`: `(floor(last 2^k) + i) / 2^k` for
/// `1 <= k, i <= s`, below 1, ascending.
fn candidates_above(last: &Rational, s: usize) -> Vec<Rational> {
    let mut out = std::collections::BTreeSet::new();
    for k in 1..=s {
        let scale = pow2(k as i64);
        let base = (last * &scale).floor();
        for i in 1..=s {
            let q = (&base + Rational::from_integer(i.into())) / &scale;
            if q < Rational::one() {
                out.insert(q);
            }
        }
    }
    out.into_iter().collect()
}

fn backward_r(w: &RWitness, a: &LeftCEApprox, len: usize, fuel: &mut Fuel) -> Extraction {
    let mut cache = ValueCache::new(&w.machine);
    let mut prefix: Vec<Rational> = Vec::new();
    let mut j_prev: Option<usize> = None;
    let mut sched = Schedule::new();
    'steps: while prefix.len() < len {
        let last = prefix.last().cloned().unwrap_or_else(Rational::zero);
        loop {
            if fuel.burn(1).is_err() {
                break 'steps;
            }
            // candidates may lie outside the domain, where no allowance
            // suffices, so the effort stays flat
            let (stage, allowance) = (sched.stage, sched.allowance());
            let j_lo = j_prev.map_or(0, |j| j + 1);
            let Ok(a_top) = a.term(stage) else { break 'steps };
            // Ascending candidates; the machine is nondecreasing, so past the
            // first one that has not halted this stage the rest wait too.
            'cands: for q in candidates_above(&last, stage) {
                // per candidate, the tolerance giving the smallest stream index
                let mut best: Option<usize> = None;
                for m in 1..=stage {
                    let tol = pow2(-(m as i64));
                    let wide = pow2(2 - m as i64);
                    let r = match cache.get(&q, m, allowance, fuel) {
                        Ok(Probe::Value(v)) => v,
                        Ok(_) if m == 1 => break 'cands,
                        Ok(_) => break,
                        Err(_) => break 'steps,
                    };
                    if let Some(jp) = j_prev {
                        let Ok(ajp) = a.term(jp) else { break 'steps };
                        if ajp + &tol >= &r - &tol {
                            continue;
                        }
                    }
                    // a is increasing: some j in [j_lo, stage] works iff j = stage does
                    if j_lo > stage || &r + &wide >= &a_top - &wide {
                        continue;
                    }
                    let j = (j_lo..=stage)
                        .find(|&j| a.term(j).is_ok_and(|aj| &r + &wide < aj - &wide))
                        .expect("stage index satisfies the gate");
                    if best.is_none_or(|b| j < b) {
                        best = Some(j);
                    }
                }
                if let Some(j) = best {
                    prefix.push(q);
                    j_prev = Some(j);
                    continue 'steps;
                }
            }
            sched.advance();
        }
    }
    let complete = prefix.len() >= len;
    Extraction { prefix, complete }
}

impl std::fmt::Display for Extraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self.prefix.iter().map(fmt_rational).collect();
        write!(f, "[{}]{}", terms.join(", "), if self.complete { "" } else { " (incomplete)" })
    }
}
