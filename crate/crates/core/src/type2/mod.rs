//! Real functions computed on rational-stream oracles.
//!
//! A machine produces output number `n` from a finite oracle prefix. Output
//! `n` is the result with tolerance `2^-(n-1)`: it lies strictly within
//! `2^-(n-1)` of the true value whenever the oracle names a domain point.
//! The builtins aim for `2^-(n+2)` internally, so their outputs always form an
//! effective approximation.

mod machines;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{Budget, EffectiveApprox, Fuel, KernelError, OutOfFuel, Rational};

pub use machines::{Affine, Breakpoints, Constant, Monotonized, PiecewiseLinear, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Emit(Rational),
    /// The machine needs at least this many oracle terms.
    NeedOracle(usize),
    /// Finite output: the machine is undefined on this oracle.
    Halt,
}

pub trait Machine: Send + Sync {
    fn output(&self, oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel>;

    fn lipschitz(&self) -> Option<Rational> {
        None
    }

    /// True only when the computed function is known to be nondecreasing.
    fn nondecreasing(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

#[derive(Clone)]
pub struct RFunctionMachine(Arc<dyn Machine>);

impl RFunctionMachine {
    pub fn new(m: impl Machine + 'static) -> Self {
        RFunctionMachine(Arc::new(m))
    }

    pub fn constant(r: Rational) -> Self {
        Self::new(Constant(r))
    }

    pub fn identity() -> Self {
        Self::new(Affine::identity())
    }

    pub fn lipschitz(&self) -> Option<Rational> {
        self.0.lipschitz()
    }

    pub fn nondecreasing(&self) -> bool {
        self.0.nondecreasing()
    }

    pub fn describe(&self) -> String {
        self.0.describe()
    }

    pub fn inner(&self) -> &dyn Machine {
        self.0.as_ref()
    }

    /// Output `n` on an oracle given term-by-term.
    pub fn drive<F>(&self, n: usize, fuel: &mut Fuel, mut term: F) -> Result<Outcome, KernelError>
    where
        F: FnMut(usize) -> Result<Rational, KernelError>,
    {
        let mut prefix: Vec<Rational> = Vec::new();
        loop {
            match self.0.output(&prefix, n, fuel) {
                Err(OutOfFuel) => return Ok(Outcome::Exhausted),
                Ok(Step::Emit(v)) => return Ok(Outcome::Value(v)),
                Ok(Step::Halt) => return Ok(Outcome::Undefined),
                Ok(Step::NeedOracle(k)) => {
                    if k <= prefix.len() {
                        // a machine asking for terms it already has is broken
                        return Ok(Outcome::Undefined);
                    }
                    while prefix.len() < k {
                        if fuel.burn(1).is_err() {
                            return Ok(Outcome::Exhausted);
                        }
                        match term(prefix.len()) {
                            Ok(q) => prefix.push(q),
                            Err(KernelError::StreamEnded { .. }) => return Ok(Outcome::Exhausted),
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
    }

    /// Output `n` on the constant oracle `(q, q, ...)`.
    pub fn eval_at(&self, q: &Rational, n: usize, fuel: &mut Fuel) -> Outcome {
        self.drive(n, fuel, |_| Ok(q.clone())).expect("constant oracle never fails")
    }
}

impl fmt::Debug for RFunctionMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RFunctionMachine({})", self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Rational),
    Undefined,
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryStatus {
    Ok,
    FuelExhausted,
    MachineUndefined,
}

impl fmt::Display for QueryStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryStatus::Ok => "ok",
            QueryStatus::FuelExhausted => "fuel-exhausted",
            QueryStatus::MachineUndefined => "machine-undefined",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToleranceResult {
    pub value: Option<Rational>,
    /// Output index `n`; the guarantee is `2^-(n-1)`.
    pub tolerance_index: usize,
    pub status: QueryStatus,
}

impl ToleranceResult {
    fn from_outcome(o: Outcome, n: usize) -> Self {
        let (value, status) = match o {
            Outcome::Value(v) => (Some(v), QueryStatus::Ok),
            Outcome::Undefined => (None, QueryStatus::MachineUndefined),
            Outcome::Exhausted => (None, QueryStatus::FuelExhausted),
        };
        ToleranceResult { value, tolerance_index: n, status }
    }

    pub fn ok(&self) -> Option<&Rational> {
        self.value.as_ref().filter(|_| self.status == QueryStatus::Ok)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Type2Error {
    #[error("monotonization needs a declared Lipschitz bound on `{0}`")]
    NoLipschitzBound(String),
    #[error("compact interval [{0},{1}] is empty or degenerate")]
    EmptyCompact(String, String),
    #[error(transparent)]
    Oracle(#[from] KernelError),
}

/// Runs `m` on `oracle` until output `n` exists or fuel runs out.
pub fn query_with_tolerance(
    m: &RFunctionMachine,
    oracle: &EffectiveApprox,
    n: usize,
    b: &Budget,
) -> Result<ToleranceResult, Type2Error> {
    let mut fuel = b.meter();
    let o = m.drive(n, &mut fuel, |k| oracle.term(k))?;
    Ok(ToleranceResult::from_outcome(o, n))
}

/// Output `n` on the constant oracle `(q, q, ...)`, under a fresh meter.
pub fn query_constant(m: &RFunctionMachine, q: &Rational, n: usize, b: &Budget) -> ToleranceResult {
    let mut fuel = b.meter();
    ToleranceResult::from_outcome(m.eval_at(q, n, &mut fuel), n)
}

/// The first `count` outputs on `oracle`, stopping early on a non-ok status.
pub fn run_outputs(
    m: &RFunctionMachine,
    oracle: &EffectiveApprox,
    count: usize,
    b: &Budget,
) -> Result<(Vec<Rational>, QueryStatus), Type2Error> {
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let r = query_with_tolerance(m, oracle, n, b)?;
        match r.value {
            Some(v) if r.status == QueryStatus::Ok => out.push(v),
            _ => return Ok((out, r.status)),
        }
    }
    Ok((out, QueryStatus::Ok))
}

/// `x -> max{ f(y) : y in [0,x] }`.
pub fn monotonize_max(m: &RFunctionMachine) -> Result<RFunctionMachine, Type2Error> {
    Ok(RFunctionMachine::new(Monotonized::new(m.clone())?))
}

/// Tolerance-indexed maximum of the monotonized function over `[p, q]`,
/// which is its value at `q`.
pub fn max_on_compact(
    m: &RFunctionMachine,
    p: &Rational,
    q: &Rational,
    b: &Budget,
) -> Result<ToleranceResult, Type2Error> {
    if p >= q {
        return Err(Type2Error::EmptyCompact(crate::kernel::fmt_rational(p), crate::kernel::fmt_rational(q)));
    }
    let mono = monotonize_max(m)?;
    Ok(query_constant(&mono, q, b.tolerance_index, b))
}
