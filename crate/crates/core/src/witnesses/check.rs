use std::fmt;

use num_traits::{Signed, Zero};

use crate::kernel::{fmt_rational, pow2, Budget, CanonicalRationals, Rational};
use crate::type2::{query_constant, QueryStatus};

use super::{merge_points, QWitness, RKind, RWitness, RealName, Tri};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub property: String,
    pub samples: usize,
    pub violations: Vec<String>,
    pub unknowns: usize,
    pub exhausted: usize,
    pub verdict: Verdict,
}

impl CheckReport {
    fn new(name: &str, property: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            property: property.to_string(),
            samples: 0,
            violations: Vec::new(),
            unknowns: 0,
            exhausted: 0,
            verdict: Verdict::Inconclusive,
        }
    }

    fn finish(mut self) -> Self {
        self.verdict = if !self.violations.is_empty() {
            Verdict::Fail
        } else if self.exhausted > 0 || (self.samples == 0 && self.unknowns > 0) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} samples={} violations={} unknowns={} exhausted={} verdict={}",
            self.name,
            self.property,
            self.samples,
            self.violations.len(),
            self.unknowns,
            self.exhausted,
            self.verdict
        )?;
        if let Some(v) = self.violations.first() {
            write!(f, " first=\"{v}\"")?;
        }
        Ok(())
    }
}

/// The first `16 * depth` rationals of the canonical order.
pub fn sample_points(depth: usize) -> Vec<Rational> {
    CanonicalRationals::new().take(16 * depth.max(1)).collect()
}

fn slack(depth: usize) -> Rational {
    pow2(2 - depth as i64)
}

/// Evaluates `w` on the sampled part of its certified domain. Exhausted
/// samples are counted, not returned.
fn defined_samples(w: &QWitness, b: &Budget, report: &mut CheckReport) -> Vec<(Rational, Rational)> {
    let points = merge_points([sample_points(b.depth), w.distinguished_points(b.depth)]);
    let mut out = Vec::new();
    for q in points {
        match w.in_domain(&q, b.depth) {
            Tri::No => continue,
            Tri::Unknown => {
                report.unknowns += 1;
                continue;
            }
            Tri::Yes => {}
        }
        match w.eval(&q, &mut b.meter()) {
            Ok(Some(g)) => out.push((q, g)),
            Ok(None) => {}
            Err(_) => report.exhausted += 1,
        }
    }
    report.samples = out.len();
    out
}

/// Samples `q` certified below `beta` and checks
/// `alpha - g(q) < c (beta - q)` and `g(q) < alpha`, both with depth slack.
pub fn check_solovay_condition(w: &QWitness, alpha: &RealName, beta: &RealName, b: &Budget) -> CheckReport {
    let mut r = CheckReport::new(&w.label, "solovay");
    let eps = slack(b.depth);
    let a = alpha.enclosure(b.depth);
    let beta_best = beta.best(b.depth);
    let points = merge_points([
        sample_points(b.depth),
        beta.lower_prefix(b.depth),
        alpha.lower_prefix(b.depth),
        w.distinguished_points(b.depth),
    ]);
    for q in points {
        match beta.below(&q, b.depth) {
            Tri::Yes => {}
            Tri::No => continue,
            Tri::Unknown => {
                r.unknowns += 1;
                continue;
            }
        }
        let g = match w.eval(&q, &mut b.meter()) {
            Ok(Some(g)) => g,
            Ok(None) => {
                r.violations.push(format!("witness-domain violation: g undefined at {}", fmt_rational(&q)));
                continue;
            }
            Err(_) => {
                r.exhausted += 1;
                r.violations.push(format!("witness-domain violation: fuel exhausted at {}", fmt_rational(&q)));
                continue;
            }
        };
        r.samples += 1;
        let lhs = &a.lo - &g;
        let rhs = &w.constant_c * (&beta_best - &q) + &eps;
        if lhs >= rhs {
            r.violations.push(format!(
                "q={} g={} alpha-g={} >= c(beta-q)+slack={}",
                fmt_rational(&q),
                fmt_rational(&g),
                fmt_rational(&lhs),
                fmt_rational(&rhs)
            ));
        }
        if let Some(hi) = &a.hi {
            if &g >= hi {
                r.violations.push(format!("q={} g={} >= alpha={}", fmt_rational(&q), fmt_rational(&g), fmt_rational(hi)));
            }
        }
    }
    r.finish()
}

/// Strict Lipschitz bound `|g(q) - g(p)| < d |q - p|` over all sampled pairs.
pub fn check_lipschitz_q(w: &QWitness, d: &Rational, b: &Budget) -> CheckReport {
    let mut r = CheckReport::new(&w.label, "lipschitz");
    let pts = defined_samples(w, b, &mut r);
    for (i, (p, gp)) in pts.iter().enumerate() {
        for (q, gq) in &pts[i + 1..] {
            if (gq - gp).abs() >= d * (q - p).abs() {
                r.violations.push(format!(
                    "|g({})-g({})|={} >= {}",
                    fmt_rational(q),
                    fmt_rational(p),
                    fmt_rational(&(gq - gp).abs()),
                    fmt_rational(&(d * (q - p).abs()))
                ));
            }
        }
    }
    r.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Nondecreasing,
    Strict,
}

/// Sampled pairs `p < q` with both values defined satisfy `g(p) <= g(q)`
/// (or `<` in strict mode).
pub fn check_monotone(w: &QWitness, b: &Budget, mode: Monotonicity) -> CheckReport {
    let mut r = CheckReport::new(&w.label, "monotone");
    let pts = defined_samples(w, b, &mut r);
    for (i, (p, gp)) in pts.iter().enumerate() {
        for (q, gq) in &pts[i + 1..] {
            let bad = match mode {
                Monotonicity::Nondecreasing => gp > gq,
                Monotonicity::Strict => gp >= gq,
            };
            if bad {
                r.violations.push(format!(
                    "{} < {} but g={} vs g={}",
                    fmt_rational(p),
                    fmt_rational(q),
                    fmt_rational(gp),
                    fmt_rational(gq)
                ));
            }
        }
    }
    r.finish()
}

const R_SAMPLE_CAP: usize = 48;

/// Lipschitz, limit and range checks for an R-witness at the budget's
/// tolerance index, plus evaluability up to the bound for cl-local witnesses.
pub fn check_r_witness(w: &RWitness, alpha: &RealName, beta: &RealName, b: &Budget) -> CheckReport {
    let mut r = CheckReport::new(&w.label, &format!("r-witness[{}]", w.kind));
    let n = b.tolerance_index;
    let tol = pow2(1 - n as i64);
    let eps = slack(b.depth);
    let a = alpha.enclosure(b.depth);
    let beta_enc = beta.enclosure(b.depth);
    let beta_hi = beta_enc.hi.clone().unwrap_or_else(|| beta.best(b.depth));
    let c = &w.constant_c;

    let query = |q: &Rational, r: &mut CheckReport| -> Option<Rational> {
        let res = query_constant(&w.machine, q, n, b);
        match res.status {
            QueryStatus::Ok => res.value,
            QueryStatus::FuelExhausted => {
                r.exhausted += 1;
                None
            }
            QueryStatus::MachineUndefined => {
                r.violations.push(format!("domain violation: machine undefined at {}", fmt_rational(q)));
                None
            }
        }
    };

    // limit points: beta's own lower approximations, and points closing in on beta
    let mut xs = beta.lower_prefix(b.depth);
    for k in 2..=b.depth as i64 {
        let x = &beta_enc.lo - pow2(-k);
        if x >= Rational::zero() {
            xs.push(x);
        }
    }
    let xs = merge_points([xs]);
    let inside: Vec<Rational> = merge_points([sample_points(b.depth), xs.clone()])
        .into_iter()
        .filter(|q| match beta.below(q, b.depth) {
            Tri::Yes => true,
            Tri::No => false,
            Tri::Unknown => {
                r.unknowns += 1;
                false
            }
        })
        .collect();
    let mut lip: Vec<Rational> = inside.iter().filter(|q| !xs.contains(q)).take(R_SAMPLE_CAP / 2).cloned().collect();
    lip.extend(xs.iter().filter(|x| inside.contains(x)).rev().take(R_SAMPLE_CAP / 2).cloned());

    let mut vals: Vec<(Rational, Rational)> = Vec::new();
    for q in merge_points([lip]) {
        if let Some(v) = query(&q, &mut r) {
            vals.push((q, v));
        }
    }
    r.samples = vals.len();

    for (i, (p, vp)) in vals.iter().enumerate() {
        for (q, vq) in &vals[i + 1..] {
            let bound = c * (q - p).abs() + &tol * Rational::from_integer(2.into());
            if (vq - vp).abs() >= bound {
                r.violations.push(format!("lipschitz: {} vs {} differ by {}", fmt_rational(p), fmt_rational(q), fmt_rational(&(vq - vp).abs())));
            }
        }
    }

    for (x, v) in vals.iter().filter(|(x, _)| xs.contains(x)) {
        let allow = c * (&beta_hi - x) + &tol + &eps;
        if &a.lo - v >= allow {
            r.violations.push(format!("limit: f({})~{} too far below alpha", fmt_rational(x), fmt_rational(v)));
        }
        if let Some(hi) = &a.hi {
            if v - hi >= allow {
                r.violations.push(format!("limit: f({})~{} too far above alpha", fmt_rational(x), fmt_rational(v)));
            }
        }
    }

    if w.kind == RKind::Real {
        if let Some(hi) = &a.hi {
            for (q, v) in &vals {
                if v >= &(hi + &tol) {
                    r.violations.push(format!("range: f({})~{} not below alpha", fmt_rational(q), fmt_rational(v)));
                }
            }
        }
    }

    if let RKind::ClLocal { bound } = &w.kind {
        let extra: Vec<Rational> =
            sample_points(b.depth).into_iter().filter(|q| q < bound).take(R_SAMPLE_CAP).collect();
        for q in extra {
            query(&q, &mut r);
        }
    }
    r.finish()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrendReport {
    pub g_converging: bool,
    pub q_converging: bool,
    pub g_nondecreasing: bool,
    pub consistent: bool,
}

fn gap_shrinks(gaps: &[Rational]) -> bool {
    match (gaps.first(), gaps.last()) {
        (Some(first), Some(last)) if gaps.len() >= 2 => last.is_zero() || last * Rational::from_integer(2.into()) <= *first,
        _ => false,
    }
}

/// Whether `g_n -> alpha_hint` is accompanied by `q_n -> beta_hint`, judged
/// by gap shrinkage over the given prefix.
pub fn convergence_diagnostic(values: &[(Rational, Rational)], alpha_hint: &Rational, beta_hint: &Rational) -> TrendReport {
    let g_gaps: Vec<Rational> = values.iter().map(|(_, g)| (alpha_hint - g).abs()).collect();
    let q_gaps: Vec<Rational> = values.iter().map(|(q, _)| (beta_hint - q).abs()).collect();
    let g_converging = gap_shrinks(&g_gaps);
    let q_converging = gap_shrinks(&q_gaps);
    TrendReport {
        g_converging,
        q_converging,
        g_nondecreasing: values.windows(2).all(|w| w[0].1 <= w[1].1),
        consistent: !g_converging || q_converging,
    }
}
