//! Conversion of a rational Solovay witness `g` into a Lipschitz real
//! witness `h`, through the stages `gt`, `P(q,n)`, `f`, `ft`.
//!
//! The domain enumeration `q_0 = 0, q_1, ...` and the values `g`, `gt` are
//! cached across queries. Each enumerated item is charged to the caller at a
//! fixed recorded cost, so outcomes never depend on query history.

pub mod claims;
pub mod reference;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Bound::{Excluded, Unbounded};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::kernel::{fmt_rational, pow2, Budget, Fuel, OutOfFuel, Rational};
use crate::type2::{Machine, RFunctionMachine, Step};
use crate::witnesses::{DomainBound, DomainEnumerator, QWitness, RKind, RWitness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("the Solovay constant must be positive")]
    NonPositiveConstant,
    #[error("the domain enumeration must start at 0, got {0}")]
    ZeroNotFirst(String),
    #[error("the domain enumeration ended after {0} points")]
    DomainEnded(usize),
    #[error("fuel exhausted")]
    Exhausted,
}

impl From<OutOfFuel> for PipelineError {
    fn from(_: OutOfFuel) -> Self {
        PipelineError::Exhausted
    }
}

/// `c`, the minimal `K >= 2` with `d = 2^K > c`, and the domain bound `b`.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub c: Rational,
    pub k: u32,
    pub d: Rational,
    pub domain_bound: DomainBound,
}

impl PipelineConfig {
    pub fn new(c: &Rational, domain_bound: DomainBound) -> Result<Self, PipelineError> {
        if c <= &Rational::zero() {
            return Err(PipelineError::NonPositiveConstant);
        }
        let mut k = 2u32;
        while pow2(k as i64) <= *c {
            k += 1;
        }
        Ok(PipelineConfig { c: c.clone(), k, d: pow2(k as i64), domain_bound })
    }

    pub fn for_witness(w: &QWitness) -> Result<Self, PipelineError> {
        Self::new(&w.constant_c, w.domain_bound.clone())
    }
}

/// Enumerated domain point with its `g` and `gt` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub q: Rational,
    pub g: Rational,
    pub gt: Rational,
}

/// Steps one extension may take before the domain is declared stuck.
const EXTENSION_CAP: u64 = 1 << 36;

struct Prefix {
    dom: DomainEnumerator,
    next_dom: usize,
    items: Vec<Item>,
    /// Fuel spent producing each item, skipped points included.
    cost: Vec<u64>,
    /// Keys `q` with strictly increasing values: the running maximum of `g` over `[0, q]`.
    stair: BTreeMap<Rational, Rational>,
}

impl Prefix {
    fn extend(&mut self, w: &QWitness) -> Result<(), PipelineError> {
        let mut meter = Fuel::new(EXTENSION_CAP);
        loop {
            let q = self.dom.get(self.next_dom, &mut meter).map_err(|_| PipelineError::DomainEnded(self.items.len()))?;
            self.next_dom += 1;
            if self.items.is_empty() && !q.is_zero() {
                return Err(PipelineError::ZeroNotFirst(fmt_rational(&q)));
            }
            // points where g has no value are not in its domain
            let Ok(Some(g)) = w.eval(&q, &mut meter) else { continue };
            let below = self.stair.range(..=q.clone()).next_back().map(|(_, v)| v.clone());
            let gt = match below {
                Some(m) if m >= g => m,
                _ => {
                    let drop: Vec<Rational> =
                        self.stair.range((Excluded(q.clone()), Unbounded)).take_while(|(_, v)| **v <= g).map(|(k, _)| k.clone()).collect();
                    for k in drop {
                        self.stair.remove(&k);
                    }
                    self.stair.insert(q.clone(), g.clone());
                    g.clone()
                }
            };
            self.items.push(Item { q, g, gt });
            self.cost.push(EXTENSION_CAP - meter.remaining());
            return Ok(());
        }
    }
}

/// The greatest chain for `(q, n)`: enumeration indices sorted by value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexChain {
    /// The first enumeration step at which a chain exists.
    pub step: usize,
    pub indices: Vec<usize>,
    pub values: Vec<Rational>,
}

/// `P(q,n)`, `f(q,n)` and `ft(q,n)` for one argument pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageValue {
    pub q: Rational,
    pub n: usize,
    pub chain: IndexChain,
    pub f: Rational,
    pub ftilde: Rational,
}

/// Points `<= q` seen so far and the run of them starting at `0` with gaps below `w`.
struct Run {
    set: BTreeMap<Rational, usize>,
    max: Option<Rational>,
    width: Rational,
}

impl Run {
    fn new(width: Rational) -> Self {
        Run { set: BTreeMap::new(), max: None, width }
    }

    /// Inserts a point, returning the points that joined the run.
    fn insert(&mut self, x: Rational, i: usize) -> Vec<(Rational, usize)> {
        self.set.insert(x.clone(), i);
        let mut joined = Vec::new();
        let mut at = match &self.max {
            None if x.is_zero() => {
                joined.push((x.clone(), i));
                x
            }
            None => return joined,
            Some(m) if &x <= m => return vec![(x, i)],
            Some(m) if &x - m < self.width => m.clone(),
            Some(_) => return joined,
        };
        while let Some((y, j)) = self.set.range((Excluded(at.clone()), Unbounded)).next() {
            if y - &at >= self.width {
                break;
            }
            joined.push((y.clone(), *j));
            at = y.clone();
        }
        self.max = Some(at);
        joined
    }

    /// `q` is reached once the run ends within `w` below it.
    fn reaches(&self, q: &Rational) -> bool {
        self.max.as_ref().is_some_and(|m| q - m < self.width)
    }
}

/// Prefix minimum over positions `0..len`.
struct MinFenwick {
    tree: Vec<Option<Rational>>,
}

impl MinFenwick {
    fn new(len: usize) -> Self {
        MinFenwick { tree: vec![None; len + 1] }
    }

    fn insert(&mut self, pos: usize, v: &Rational) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            if self.tree[i].as_ref().is_none_or(|c| v < c) {
                self.tree[i] = Some(v.clone());
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Minimum over positions `0..=pos`.
    fn prefix(&self, pos: usize) -> Option<Rational> {
        let mut i = pos + 1;
        let mut best: Option<Rational> = None;
        while i > 0 {
            if let Some(v) = &self.tree[i] {
                if best.as_ref().is_none_or(|b| v < b) {
                    best = Some(v.clone());
                }
            }
            i -= i & i.wrapping_neg();
        }
        best
    }
}

/// A rational Solovay witness prepared for the conversion.
pub struct Pipeline {
    pub witness: QWitness,
    pub config: PipelineConfig,
    prefix: Mutex<Prefix>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Pipeline({}, K={})", self.witness.label, self.config.k)
    }
}

impl Pipeline {
    pub fn new(w: &QWitness) -> Result<Self, PipelineError> {
        let config = PipelineConfig::for_witness(w)?;
        Ok(Self::with_config(w, config))
    }

    pub fn with_config(w: &QWitness, config: PipelineConfig) -> Self {
        let prefix = Prefix { dom: w.domain_enumerator(), next_dom: 0, items: Vec::new(), cost: Vec::new(), stair: BTreeMap::new() };
        Pipeline { witness: w.clone(), config, prefix: Mutex::new(prefix) }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Prefix> {
        self.prefix.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Makes item `t` available, charging its recorded cost plus one step.
    fn reach(&self, pre: &mut Prefix, t: usize, fuel: &mut Fuel) -> Result<(), PipelineError> {
        while pre.items.len() <= t {
            pre.extend(&self.witness)?;
        }
        fuel.burn(1 + pre.cost[t])?;
        Ok(())
    }

    fn item(&self, pre: &mut Prefix, t: usize, fuel: &mut Fuel) -> Result<Item, PipelineError> {
        self.reach(pre, t, fuel)?;
        Ok(pre.items[t].clone())
    }

    /// The first `len` enumerated items.
    pub fn items(&self, len: usize, fuel: &mut Fuel) -> Result<Vec<Item>, PipelineError> {
        let mut pre = self.lock();
        (0..len).map(|t| self.item(&mut pre, t, fuel)).collect()
    }

    /// `gt(q_k)` for the enumeration index `k`.
    pub fn gtilde(&self, k: usize, fuel: &mut Fuel) -> Result<Rational, PipelineError> {
        let mut pre = self.lock();
        for t in 0..k {
            self.item(&mut pre, t, fuel)?;
        }
        Ok(self.item(&mut pre, k, fuel)?.gt)
    }

    /// The first step with a chain, and the chain's enumeration indices.
    fn find_chain(&self, pre: &mut Prefix, q: &Rational, n: usize, fuel: &mut Fuel) -> Result<(usize, Vec<usize>), PipelineError> {
        if q < &Rational::zero() {
            // no chain from 0 ever ends within 2^-n below a negative point
            return Err(PipelineError::Exhausted);
        }
        let mut run = Run::new(pow2(-(n as i64)));
        let mut t = 0;
        loop {
            // an enumeration that ends leaves the search running forever
            self.reach(pre, t, fuel).map_err(|e| match e {
                PipelineError::DomainEnded(_) => PipelineError::Exhausted,
                e => e,
            })?;
            let x = &pre.items[t].q;
            if x <= q {
                run.insert(x.clone(), t);
            }
            if run.reaches(q) {
                let m = run.max.clone().expect("run reaches q");
                let idx: Vec<usize> = run.set.range(..=m).map(|(_, i)| *i).collect();
                return Ok((t, idx));
            }
            t += 1;
        }
    }

    /// `P(q,n)`.
    pub fn search_p(&self, q: &Rational, n: usize, fuel: &mut Fuel) -> Result<IndexChain, PipelineError> {
        let mut pre = self.lock();
        let (step, indices) = self.find_chain(&mut pre, q, n, fuel)?;
        let values = indices.iter().map(|&i| pre.items[i].q.clone()).collect();
        Ok(IndexChain { step, indices, values })
    }

    /// `P(q,n)`, `f(q,n)` and `ft(q,n)`. The chain points' own `f` values come
    /// from one replay of the enumeration: each is fixed at the first step
    /// where the run reaches it.
    pub fn stage(&self, q: &Rational, n: usize, fuel: &mut Fuel) -> Result<StageValue, PipelineError> {
        let mut pre = self.lock();
        let (step, indices) = self.find_chain(&mut pre, q, n, fuel)?;
        let seen = &pre.items;
        let d = &self.config.d;
        let values: Vec<Rational> = indices.iter().map(|&i| seen[i].q.clone()).collect();
        let pos: BTreeMap<&Rational, usize> = values.iter().enumerate().map(|(p, v)| (v, p)).collect();

        let mut run = Run::new(pow2(-(n as i64)));
        let mut mins = MinFenwick::new(values.len());
        let mut resolved = 0usize;
        let mut ftilde: Option<Rational> = None;
        for (t, it) in seen.iter().enumerate().take(step + 1) {
            fuel.burn(1)?;
            if &it.q <= q {
                for (x, i) in run.insert(it.q.clone(), t) {
                    let p = pos[&x];
                    mins.insert(p, &(&seen[i].gt - d * &x));
                }
            }
            while resolved < values.len() && run.reaches(&values[resolved]) {
                let x = &values[resolved];
                let m = mins.prefix(resolved).expect("0 is in every run");
                let fx = d * x + m;
                if ftilde.as_ref().is_none_or(|b| &fx > b) {
                    ftilde = Some(fx);
                }
                resolved += 1;
            }
        }
        let f = d * q + mins.prefix(values.len() - 1).expect("0 is in every run");
        let ftilde = match ftilde {
            Some(b) if b > f => b,
            _ => f.clone(),
        };
        Ok(StageValue { q: q.clone(), n, chain: IndexChain { step, indices, values }, f, ftilde })
    }
}

/// `gt(q_k)` on a fresh pipeline.
pub fn gtilde(w: &QWitness, k: usize, b: &Budget) -> Result<Rational, PipelineError> {
    Pipeline::new(w)?.gtilde(k, &mut b.meter())
}

pub fn search_p(p: &Pipeline, q: &Rational, n: usize, b: &Budget) -> Result<IndexChain, PipelineError> {
    p.search_p(q, n, &mut b.meter())
}

pub fn f_two_arg(p: &Pipeline, q: &Rational, n: usize, b: &Budget) -> Result<Rational, PipelineError> {
    Ok(p.stage(q, n, &mut b.meter())?.f)
}

pub fn ftilde_two_arg(p: &Pipeline, q: &Rational, n: usize, b: &Budget) -> Result<Rational, PipelineError> {
    Ok(p.stage(q, n, &mut b.meter())?.ftilde)
}

/// Output `j` reads oracle term `n = j + K + 3` and returns `ft(max(q_n, 0), n)`.
/// `ft(q_n, n)` is within `2^-(n-K-1)` of `h(q_n)`, and `|q_n - x| < 2^-(n-1)`,
/// so outputs are within `2^-(j+1)` of `h(x)` and form an effective approximation.
struct HMachine {
    pipeline: Arc<Pipeline>,
}

impl HMachine {
    fn stage_index(&self, j: usize) -> usize {
        j + self.pipeline.config.k as usize + 3
    }
}

impl Machine for HMachine {
    fn output(&self, oracle: &[Rational], j: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        let n = self.stage_index(j);
        if oracle.len() <= n {
            return Ok(Step::NeedOracle(n + 1));
        }
        let q = if oracle[n] < Rational::zero() { Rational::zero() } else { oracle[n].clone() };
        match self.pipeline.stage(&q, n, fuel) {
            Ok(s) => Ok(Step::Emit(s.ftilde)),
            Err(PipelineError::Exhausted) | Err(PipelineError::DomainEnded(_)) => Err(OutOfFuel),
            Err(_) => Ok(Step::Halt),
        }
    }

    fn lipschitz(&self) -> Option<Rational> {
        Some(self.pipeline.config.d.clone())
    }

    fn describe(&self) -> String {
        format!("h({}) K={}", self.pipeline.witness.label, self.pipeline.config.k)
    }
}

/// The real witness `h` with Lipschitz constant `2^K`: cl-local on `[0,1]`
/// for a total witness, cl-open otherwise.
pub fn h_machine(p: Arc<Pipeline>) -> RWitness {
    let kind = match p.config.domain_bound {
        DomainBound::One => RKind::ClLocal { bound: Rational::one() },
        _ => RKind::ClOpen,
    };
    let d = p.config.d.clone();
    let label = format!("h({})", p.witness.label);
    RWitness::new(label, RFunctionMachine::new(HMachine { pipeline: p }), d, kind)
}

/// `q,n,p_size,f,ftilde` rows.
pub fn stage_csv(rows: &[StageValue]) -> String {
    let mut out = String::from("q,n,p_size,f,ftilde\n");
    for s in rows {
        let _ = writeln!(out, "{},{},{},{},{}", fmt_rational(&s.q), s.n, s.chain.values.len(), fmt_rational(&s.f), fmt_rational(&s.ftilde));
    }
    out
}

#[cfg(test)]
mod tests;
