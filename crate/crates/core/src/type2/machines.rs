use num_traits::{One, Signed, Zero};

use super::{Machine, Outcome, RFunctionMachine, Step, Type2Error};
use crate::kernel::{fmt_rational, max_r, pow2, Fuel, LeftCEApprox, OutOfFuel, Rational};

/// Smallest `e >= 0` with `2^e >= bound`.
pub(crate) fn log2_ceil(bound: &Rational) -> i64 {
    let mut e = 0;
    while pow2(e) < *bound {
        e += 1;
    }
    e
}

/// Oracle index whose term is within `2^-(n+2)` of `x` after scaling by `lipschitz`.
fn oracle_index(n: usize, lipschitz: &Rational) -> usize {
    n + 3 + log2_ceil(lipschitz) as usize
}

fn need(oracle: &[Rational], k: usize) -> Option<Step> {
    (oracle.len() <= k).then_some(Step::NeedOracle(k + 1))
}

#[derive(Debug, Clone)]
pub struct Constant(pub Rational);

impl Machine for Constant {
    fn output(&self, _: &[Rational], _: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        fuel.burn(1)?;
        Ok(Step::Emit(self.0.clone()))
    }

    fn lipschitz(&self) -> Option<Rational> {
        Some(Rational::zero())
    }

    fn nondecreasing(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("constant {}", fmt_rational(&self.0))
    }
}

/// `x -> offset + slope * x`.
#[derive(Debug, Clone)]
pub struct Affine {
    offset: Rational,
    slope: Rational,
}

impl Affine {
    pub fn new(offset: Rational, slope: Rational) -> Self {
        Affine { offset, slope }
    }

    pub fn identity() -> Self {
        Affine::new(Rational::zero(), Rational::one())
    }
}

impl Machine for Affine {
    fn output(&self, oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        let k = oracle_index(n, &self.slope.abs());
        if let Some(s) = need(oracle, k) {
            return Ok(s);
        }
        fuel.burn(1)?;
        Ok(Step::Emit(&self.offset + &self.slope * &oracle[k]))
    }

    fn lipschitz(&self) -> Option<Rational> {
        Some(self.slope.abs())
    }

    fn nondecreasing(&self) -> bool {
        !self.slope.is_negative()
    }

    fn describe(&self) -> String {
        if self.offset.is_zero() && self.slope.is_one() {
            "identity".into()
        } else {
            format!("affine {} {}", fmt_rational(&self.offset), fmt_rational(&self.slope))
        }
    }
}

/// Polynomial with rational coefficients (constant term first), on `[0,1]`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Polynomial { coeffs }
    }

    fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    fn bound(&self) -> Rational {
        // sup |p'| on [0,1] <= sum k |c_k|
        self.coeffs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (k, c)| acc + c.abs() * Rational::from_integer((k as i64).into()))
    }
}

impl Machine for Polynomial {
    fn output(&self, oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        let k = oracle_index(n, &self.bound());
        if let Some(s) = need(oracle, k) {
            return Ok(s);
        }
        fuel.burn(self.coeffs.len() as u64)?;
        Ok(Step::Emit(self.eval(&oracle[k])))
    }

    fn lipschitz(&self) -> Option<Rational> {
        Some(self.bound())
    }

    fn describe(&self) -> String {
        let cs: Vec<_> = self.coeffs.iter().map(fmt_rational).collect();
        format!("polynomial {}", cs.join(" "))
    }
}

#[derive(Debug, Clone)]
pub enum Breakpoints {
    /// Finite table of `(x, y)` with strictly increasing `x`. Undefined above the last `x`.
    Table(Vec<(Rational, Rational)>),
    /// Breakpoints `(b_j, a_j)` from two left-c.e. streams; undefined at and above `lim b`.
    Streams { a: LeftCEApprox, b: LeftCEApprox },
}

/// Linear interpolation through breakpoints, constant `y_0` below the first one.
/// A segment steeper than the declared bound makes the machine halt.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    points: Breakpoints,
    lipschitz: Rational,
}

impl PiecewiseLinear {
    pub fn new(points: Breakpoints, lipschitz: Rational) -> Self {
        PiecewiseLinear { points, lipschitz }
    }

    pub fn points(&self) -> &Breakpoints {
        &self.points
    }

    fn segment(&self, x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational, at: &Rational) -> Option<Rational> {
        let dy = y1 - y0;
        let dx = x1 - x0;
        if dy.abs() > &self.lipschitz * &dx {
            return None;
        }
        Some(y0 + (at - x0) / dx * dy)
    }

    fn table_output(&self, table: &[(Rational, Rational)], oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        let k = oracle_index(n, &self.lipschitz);
        if let Some(s) = need(oracle, k) {
            return Ok(s);
        }
        let Some((last_x, _)) = table.last() else {
            return Ok(Step::Halt);
        };
        let p = &oracle[k];
        if p - pow2(1 - k as i64) > *last_x {
            return Ok(Step::Halt);
        }
        let x = if p > last_x { last_x.clone() } else { p.clone() };
        fuel.burn(table.len() as u64)?;
        if x < table[0].0 {
            return Ok(Step::Emit(table[0].1.clone()));
        }
        for w in table.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if x0 <= &x && &x <= x1 {
                return Ok(match self.segment(x0, y0, x1, y1, &x) {
                    Some(v) => Step::Emit(v),
                    None => Step::Halt,
                });
            }
        }
        Ok(Step::Emit(table[table.len() - 1].1.clone()))
    }

    fn stream_output(&self, a: &LeftCEApprox, b: &LeftCEApprox, oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        let k = oracle_index(n, &self.lipschitz);
        // Dovetail: at stage s look at oracle term k+s against breakpoints b_0..b_s.
        // For x below lim b some stage finds b_j > p_{k+s}.
        let mut s = 0usize;
        loop {
            let kk = k + s;
            if oracle.len() <= kk {
                // ask for a doubled prefix so restarts stay logarithmic
                return Ok(Step::NeedOracle(2 * (kk + 1)));
            }
            let p = &oracle[kk];
            for j in 0..=s {
                fuel.burn(1)?;
                // a finite breakpoint table behaves like an unfinished search
                let Ok(bj) = b.term(j) else {
                    return Err(OutOfFuel);
                };
                if &bj > p {
                    if j == 0 {
                        return Ok(match a.term(0) {
                            Ok(a0) => Step::Emit(a0),
                            Err(_) => Step::Halt,
                        });
                    }
                    let (Ok(b0), Ok(a0), Ok(a1)) = (b.term(j - 1), a.term(j - 1), a.term(j)) else {
                        return Ok(Step::Halt);
                    };
                    return Ok(match self.segment(&b0, &a0, &bj, &a1, p) {
                        Some(v) => Step::Emit(v),
                        None => Step::Halt,
                    });
                }
            }
            s += 1;
        }
    }
}

impl Machine for PiecewiseLinear {
    fn output(&self, oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        match &self.points {
            Breakpoints::Table(t) => self.table_output(t, oracle, n, fuel),
            Breakpoints::Streams { a, b } => self.stream_output(a, b, oracle, n, fuel),
        }
    }

    fn lipschitz(&self) -> Option<Rational> {
        Some(self.lipschitz.clone())
    }

    fn nondecreasing(&self) -> bool {
        match &self.points {
            Breakpoints::Table(t) => t.windows(2).all(|w| w[0].1 <= w[1].1),
            Breakpoints::Streams { .. } => true,
        }
    }

    fn describe(&self) -> String {
        match &self.points {
            Breakpoints::Table(t) => {
                let pts: Vec<_> = t.iter().map(|(x, y)| format!("{}:{}", fmt_rational(x), fmt_rational(y))).collect();
                format!("table {} lipschitz {}", pts.join(" "), fmt_rational(&self.lipschitz))
            }
            Breakpoints::Streams { a, b } => {
                format!("interpolate {} over {} lipschitz {}", a.label(), b.label(), fmt_rational(&self.lipschitz))
            }
        }
    }
}

/// Running maximum `x -> max f([0,x])`, evaluated on a dyadic grid of `[0, q]`.
///
/// Output `n` uses the oracle term at `k = n + 5 + e` (with `2^e >= L`), a grid of
/// step `2^-(n+4+e)` and inner evaluations at index `n + 5`; each of the three
/// error sources stays below `2^-(n+4)`.
pub struct Monotonized {
    inner: RFunctionMachine,
    lipschitz: Rational,
}

impl Monotonized {
    pub fn new(inner: RFunctionMachine) -> Result<Self, Type2Error> {
        let lipschitz = inner.lipschitz().ok_or_else(|| Type2Error::NoLipschitzBound(inner.describe()))?;
        Ok(Monotonized { inner, lipschitz })
    }
}

impl Machine for Monotonized {
    fn output(&self, oracle: &[Rational], n: usize, fuel: &mut Fuel) -> Result<Step, OutOfFuel> {
        if self.inner.nondecreasing() {
            return self.inner.inner().output(oracle, n, fuel);
        }
        let e = log2_ceil(&self.lipschitz);
        let k = n + 5 + e as usize;
        if let Some(s) = need(oracle, k) {
            return Ok(s);
        }
        let q = max_r(&oracle[k], &Rational::zero());
        let h = pow2(-(n as i64) - 4 - e);
        let mut best: Option<Rational> = None;
        let mut x = Rational::zero();
        loop {
            let at = if x > q { q.clone() } else { x.clone() };
            match self.inner.eval_at(&at, n + 5, fuel) {
                Outcome::Value(v) => {
                    if best.as_ref().is_none_or(|b| &v > b) {
                        best = Some(v);
                    }
                }
                Outcome::Undefined => return Ok(Step::Halt),
                Outcome::Exhausted => return Err(OutOfFuel),
            }
            if at == q {
                break;
            }
            x += &h;
        }
        Ok(Step::Emit(best.expect("grid is nonempty")))
    }

    fn lipschitz(&self) -> Option<Rational> {
        Some(self.lipschitz.clone())
    }

    fn nondecreasing(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("monotonized {}", self.inner.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat, StreamRule};

    #[test]
    fn log2_ceil_values() {
        assert_eq!(log2_ceil(&int(0)), 0);
        assert_eq!(log2_ceil(&int(1)), 0);
        assert_eq!(log2_ceil(&rat(3, 2)), 1);
        assert_eq!(log2_ceil(&int(4)), 2);
        assert_eq!(log2_ceil(&int(5)), 3);
    }

    #[test]
    fn table_machine_is_undefined_above_last_breakpoint() {
        let m = RFunctionMachine::new(PiecewiseLinear::new(
            Breakpoints::Table(vec![(int(0), int(0)), (rat(1, 2), rat(1, 4))]),
            int(1),
        ));
        let mut fuel = Fuel::new(1000);
        assert_eq!(m.eval_at(&rat(3, 4), 5, &mut fuel), Outcome::Undefined);
        assert_eq!(m.eval_at(&rat(1, 4), 5, &mut fuel), Outcome::Value(rat(1, 8)));
    }

    #[test]
    fn stream_machine_hits_breakpoints() {
        let a = LeftCEApprox::from_rule("a", StreamRule::Geometric { target: rat(1, 2), start: int(0), ratio: rat(1, 2) });
        let b = LeftCEApprox::from_rule("b", StreamRule::Geometric { target: int(1), start: int(0), ratio: rat(1, 2) });
        let m = RFunctionMachine::new(PiecewiseLinear::new(Breakpoints::Streams { a: a.clone(), b: b.clone() }, int(1)));
        let mut fuel = Fuel::new(10_000);
        assert_eq!(m.eval_at(&b.term(2).unwrap(), 6, &mut fuel), Outcome::Value(a.term(2).unwrap()));
        assert_eq!(m.eval_at(&rat(1, 4), 6, &mut fuel), Outcome::Value(rat(1, 8)));
    }

    #[test]
    fn stream_machine_diverges_at_the_limit() {
        let a = LeftCEApprox::from_rule("a", StreamRule::Geometric { target: rat(1, 2), start: int(0), ratio: rat(1, 2) });
        let b = LeftCEApprox::from_rule("b", StreamRule::Geometric { target: rat(3, 4), start: int(0), ratio: rat(1, 2) });
        let m = RFunctionMachine::new(PiecewiseLinear::new(Breakpoints::Streams { a, b }, int(1)));
        let mut fuel = Fuel::new(5_000);
        assert_eq!(m.eval_at(&rat(3, 4), 3, &mut fuel), Outcome::Exhausted);
    }
}
