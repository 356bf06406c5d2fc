use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::One;

use crate::constructions::{
    build_prop4_instance, interp_q_witness, leftce_from_monotone, leftce_from_r, monotone_from_leftce, piecewise_linear_r, test_interval,
    PairedApproximations,
};
use crate::kernel::{fmt_rational, is_leftce_prefix, pow2, Budget, EffectiveApprox, LeftCEApprox, Rational};
use crate::pipeline::claims::ClaimChecker;
use crate::pipeline::{h_machine, stage_csv, Pipeline, PipelineError};
use crate::randomness::{check_fails_on, transform_test, transform_total_test, unpropagated_hits, Hit, MeasureKind, SolovayTest};
use crate::witnesses::{
    check_lipschitz_q, check_monotone, check_r_witness, check_solovay_condition, make_constant_witness, CheckReport, Monotonicity, QRule,
    QWitness, RKind, RWitness, RealName, Verdict,
};

use super::{budget_depth, budget_fuel, BudgetDefaults, RealSpec, Scenario, ScenarioError, TaskKind, TaskSpec, TestSpec, WitnessSpec};

/// Command-line adjustments: budget defaults, a task filter, and a seed that
/// deterministic tasks ignore.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub depth: Option<usize>,
    pub fuel: Option<u64>,
    pub tasks: Vec<String>,
    pub seed: Option<u64>,
}

/// A task's verdict after `expect = fail` is applied.
pub type Outcome = Verdict;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskResult {
    pub name: String,
    pub kind: &'static str,
    pub depth: usize,
    pub fuel: u64,
    pub expect: Verdict,
    pub verdict: Verdict,
    pub outcome: Outcome,
    pub samples: usize,
    pub unknowns: usize,
    pub exhausted: usize,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
    /// `(table, csv)`
    pub tables: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub scenario: String,
    pub defaults: BudgetDefaults,
    pub tasks: Vec<TaskResult>,
}

const SHOWN_VIOLATIONS: usize = 8;

impl Report {
    pub fn count(&self, o: Outcome) -> usize {
        self.tasks.iter().filter(|t| t.outcome == o).count()
    }

    /// 0 when every task passes, 1 when any fails, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.count(Verdict::Fail) > 0 {
            1
        } else if self.count(Verdict::Inconclusive) > 0 {
            2
        } else {
            0
        }
    }

    pub fn task(&self, name: &str) -> Option<&TaskResult> {
        self.tasks.iter().find(|t| t.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.scenario)?;
        writeln!(f, "defaults depth={} fuel={}", self.defaults.depth, self.defaults.fuel)?;
        for t in &self.tasks {
            writeln!(
                f,
                "task {} kind={} depth={} fuel={} expect={} verdict={} outcome={}",
                t.name, t.kind, t.depth, t.fuel, t.expect, t.verdict, t.outcome
            )?;
            writeln!(f, "  samples={} unknowns={} exhausted={} violations={}", t.samples, t.unknowns, t.exhausted, t.violations.len())?;
            for v in t.violations.iter().take(SHOWN_VIOLATIONS) {
                writeln!(f, "  violation: {v}")?;
            }
            if t.violations.len() > SHOWN_VIOLATIONS {
                writeln!(f, "  violation: ... {} more", t.violations.len() - SHOWN_VIOLATIONS)?;
            }
            for n in &t.notes {
                writeln!(f, "  note: {n}")?;
            }
            for (name, csv) in &t.tables {
                writeln!(f, "  table {name} rows={}", csv.lines().count().saturating_sub(1))?;
            }
        }
        writeln!(
            f,
            "summary tasks={} pass={} fail={} inconclusive={} exit={}",
            self.tasks.len(),
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Inconclusive),
            self.exit_code()
        )
    }
}

#[derive(Clone)]
struct RealVal {
    name: RealName,
    stream: Option<LeftCEApprox>,
}

#[derive(Clone)]
enum Wit {
    Q(QWitness),
    R(RWitness),
}

struct Env {
    reals: HashMap<String, RealVal>,
    witnesses: HashMap<String, Wit>,
    pipelines: HashMap<String, Arc<Pipeline>>,
    tests: HashMap<String, SolovayTest>,
}

fn build_err(name: &str, e: impl fmt::Display) -> ScenarioError {
    ScenarioError::Parse { line: 0, message: format!("cannot build `{name}`: {e}") }
}

impl Env {
    fn new(sc: &Scenario) -> Result<Env, ScenarioError> {
        let mut env = Env { reals: HashMap::new(), witnesses: HashMap::new(), pipelines: HashMap::new(), tests: HashMap::new() };
        for (name, spec) in &sc.reals {
            let val = match spec {
                RealSpec::Exact(q) => RealVal { name: RealName::exact(name, q.clone()), stream: None },
                RealSpec::LeftCE(rule) => {
                    let a = LeftCEApprox::from_rule(name, rule.clone());
                    RealVal { name: RealName::leftce(name, a.clone()), stream: Some(a) }
                }
                RealSpec::Effective(rule) => RealVal { name: RealName::effective(name, EffectiveApprox::from_rule(name, rule.clone())), stream: None },
                RealSpec::Prop4Beta(d) => {
                    let inst = build_prop4_instance(*d).map_err(|e| build_err(name, e))?;
                    RealVal { name: RealName::effective(name, inst.beta), stream: None }
                }
            };
            env.reals.insert(name.clone(), val);
        }
        let stream = |env: &Env, r: &str| env.reals[r].stream.clone().expect("validated as leftce");
        // rational witnesses first; `h` refers to them
        for pass in [false, true] {
            for (name, spec) in sc.witnesses.iter().filter(|(_, s)| matches!(s, WitnessSpec::H { .. }) == pass) {
                let w = match spec {
                    WitnessSpec::Interp { a, b, d, depth } => {
                        let p = PairedApproximations::new(stream(&env, a), stream(&env, b), d.clone(), *depth).map_err(|e| build_err(name, e))?;
                        let mut w = interp_q_witness(&p);
                        w.label = name.clone();
                        Wit::Q(w)
                    }
                    WitnessSpec::Affine { offset, slope, c } => {
                        Wit::Q(QWitness::new(name, QRule::Affine { offset: offset.clone(), slope: slope.clone() }, c.clone()))
                    }
                    WitnessSpec::Constant { value, c } => Wit::Q(QWitness::new(name, QRule::Constant(value.clone()), c.clone())),
                    WitnessSpec::Table { c, points } => Wit::Q(QWitness::new(name, QRule::Table(points.clone()), c.clone())),
                    WitnessSpec::StepForward { a, b, c } => {
                        Wit::Q(QWitness::new(name, QRule::StepForward { a: stream(&env, a), b: stream(&env, b) }, c.clone()))
                    }
                    WitnessSpec::StepBackward { a, b, c } => {
                        Wit::Q(QWitness::new(name, QRule::StepBackward { a: stream(&env, a), b: stream(&env, b) }, c.clone()))
                    }
                    WitnessSpec::MonotoneFrom { a, b, direction } => {
                        let mut w = monotone_from_leftce(&stream(&env, a), &stream(&env, b), *direction);
                        w.label = name.clone();
                        Wit::Q(w)
                    }
                    WitnessSpec::Prop4 { depth } => {
                        let mut w = build_prop4_instance(*depth).map_err(|e| build_err(name, e))?.witness;
                        w.label = name.clone();
                        Wit::Q(w)
                    }
                    WitnessSpec::RConstant { value, open } => {
                        let mut w = make_constant_witness(value.clone());
                        w.label = name.clone();
                        if *open {
                            w.kind = RKind::ClOpen;
                        }
                        Wit::R(w)
                    }
                    WitnessSpec::Piecewise { a, b, lipschitz } => {
                        let mut w = piecewise_linear_r(&stream(&env, a), &stream(&env, b), lipschitz.clone());
                        w.label = name.clone();
                        Wit::R(w)
                    }
                    WitnessSpec::H { of } => {
                        let p = env.pipeline(of).map_err(|e| build_err(name, e))?;
                        let mut w = h_machine(p);
                        w.label = name.clone();
                        Wit::R(w)
                    }
                };
                env.witnesses.insert(name.clone(), w);
            }
        }
        for (name, spec) in &sc.tests {
            let t = match spec {
                TestSpec::Finite(list) => SolovayTest::finite(name, list.clone()),
                TestSpec::Following { stream: s, width, ratio } => {
                    SolovayTest::following(name, stream(&env, s), width.clone(), ratio.clone()).map_err(|e| build_err(name, e))?
                }
                TestSpec::Prop4 => SolovayTest::from_fn(name, |n| Some(test_interval(n + 1)), MeasureKind::FiniteBound, Rational::new(1.into(), 3.into())),
            };
            env.tests.insert(name.clone(), t);
        }
        Ok(env)
    }

    fn q(&self, name: &str) -> &QWitness {
        match &self.witnesses[name] {
            Wit::Q(w) => w,
            Wit::R(_) => unreachable!("validated as rational"),
        }
    }

    fn r(&self, name: &str) -> &RWitness {
        match &self.witnesses[name] {
            Wit::R(w) => w,
            Wit::Q(_) => unreachable!("validated as real"),
        }
    }

    fn pipeline(&mut self, name: &str) -> Result<Arc<Pipeline>, PipelineError> {
        if let Some(p) = self.pipelines.get(name) {
            return Ok(p.clone());
        }
        let p = Arc::new(Pipeline::new(self.q(name))?);
        self.pipelines.insert(name.to_string(), p.clone());
        Ok(p)
    }

    fn real(&self, name: &str) -> &RealName {
        &self.reals[name].name
    }
}

struct Acc {
    samples: usize,
    unknowns: usize,
    exhausted: usize,
    violations: Vec<String>,
    notes: Vec<String>,
    tables: Vec<(String, String)>,
    verdict: Option<Verdict>,
}

impl Acc {
    fn new() -> Self {
        Acc { samples: 0, unknowns: 0, exhausted: 0, violations: Vec::new(), notes: Vec::new(), tables: Vec::new(), verdict: None }
    }

    fn from_check(r: CheckReport) -> Self {
        Acc { samples: r.samples, unknowns: r.unknowns, exhausted: r.exhausted, violations: r.violations, verdict: Some(r.verdict), ..Acc::new() }
    }

    fn verdict(&self) -> Verdict {
        if let Some(v) = self.verdict {
            v
        } else if !self.violations.is_empty() {
            Verdict::Fail
        } else if self.exhausted > 0 || (self.samples == 0 && self.unknowns > 0) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }
}

fn hit_str(h: Option<&Hit>) -> &'static str {
    match h {
        Some(Hit::Hit) => "hit",
        Some(Hit::Miss) => "miss",
        Some(Hit::Unknown) => "unknown",
        Some(Hit::Absent) | None => "absent",
    }
}

fn pairs<T: Clone + Ord>(xs: &[T]) -> Vec<(T, T)> {
    let mut v = xs.to_vec();
    v.sort();
    v.dedup();
    let mut out = Vec::new();
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

fn run_task(env: &mut Env, t: &TaskSpec, b: &Budget) -> Acc {
    match &t.kind {
        TaskKind::Solovay { witness, alpha, beta } => Acc::from_check(check_solovay_condition(env.q(witness), env.real(alpha), env.real(beta), b)),
        TaskKind::Lipschitz { witness, d } => Acc::from_check(check_lipschitz_q(env.q(witness), d, b)),
        TaskKind::Monotone { witness, strict } => {
            let mode = if *strict { Monotonicity::Strict } else { Monotonicity::Nondecreasing };
            Acc::from_check(check_monotone(env.q(witness), b, mode))
        }
        TaskKind::RWitness { witness, alpha, beta } => {
            let w = env.r(witness);
            let mut acc = Acc::from_check(check_r_witness(w, env.real(alpha), env.real(beta), b));
            acc.notes.push(format!("kind={} constant={}", w.kind, fmt_rational(&w.constant_c)));
            acc
        }
        TaskKind::Extract { witness, from, direction, target, output } => {
            let a = env.reals[from].stream.clone().expect("validated as leftce");
            let ex = match &env.witnesses[witness] {
                Wit::Q(w) => leftce_from_monotone(w, &a, *direction, b),
                Wit::R(w) => leftce_from_r(w, &a, *direction, b),
            };
            let mut acc = Acc::new();
            acc.samples = ex.prefix.len();
            if !is_leftce_prefix(&ex.prefix).is_valid() {
                acc.violations.push("extracted prefix is not strictly increasing in [0,1)".to_string());
            }
            if let Some(tg) = target {
                if let Some(hi) = env.real(tg).enclosure(b.depth).hi {
                    for (k, x) in ex.prefix.iter().enumerate() {
                        if x >= &hi {
                            acc.violations.push(format!("term {k} = {} not below {tg} <= {}", fmt_rational(x), fmt_rational(&hi)));
                        }
                    }
                    if let Some(last) = ex.prefix.last() {
                        acc.notes.push(format!("gap to {tg} upper bound: {}", fmt_rational(&(&hi - last))));
                    }
                }
            }
            if !ex.complete {
                acc.exhausted += 1;
                acc.notes.push(format!("fuel ran out after {} of {} terms", ex.prefix.len(), b.depth));
                if acc.violations.is_empty() {
                    acc.verdict = Some(Verdict::Inconclusive);
                }
            }
            let mut csv = String::from("k,value\n");
            for (k, x) in ex.prefix.iter().enumerate() {
                let _ = writeln!(csv, "{k},{}", fmt_rational(x));
            }
            acc.tables.push(("prefix".to_string(), csv));
            if let Some(o) = output {
                let approx = ex.approx(o);
                env.reals.insert(o.clone(), RealVal { name: RealName::leftce(o, approx.clone()), stream: Some(approx) });
            }
            acc
        }
        TaskKind::Stages { witness, points, levels } => {
            let mut acc = Acc::new();
            let p = match env.pipeline(witness) {
                Ok(p) => p,
                Err(e) => {
                    acc.violations.push(e.to_string());
                    return acc;
                }
            };
            acc.notes.push(format!("K={} d={}", p.config.k, fmt_rational(&p.config.d)));
            let mut rows = Vec::new();
            for q in points {
                for &n in levels {
                    match p.stage(q, n, &mut b.meter()) {
                        Ok(s) => rows.push(s),
                        Err(PipelineError::Exhausted) => {
                            acc.exhausted += 1;
                            acc.notes.push(format!("no chain for q={} n={n} within fuel", fmt_rational(q)));
                        }
                        Err(e) => acc.violations.push(format!("q={} n={n}: {e}", fmt_rational(q))),
                    }
                }
            }
            acc.samples = rows.len();
            acc.tables.push(("stages".to_string(), stage_csv(&rows)));
            acc
        }
        TaskKind::Claims { witness, alpha, beta, points, levels } => {
            let mut acc = Acc::new();
            let p = match env.pipeline(witness) {
                Ok(p) => p,
                Err(e) => {
                    acc.violations.push(e.to_string());
                    return acc;
                }
            };
            let (a, be) = (env.real(alpha).clone(), env.real(beta).clone());
            let mut chk = ClaimChecker::new(&p, &a, &be, b.depth);
            let mut tuples = 0;
            for (lo, hi) in pairs(points) {
                for (m, n) in pairs(levels) {
                    match chk.check(&lo, &hi, m, n, &mut b.meter()) {
                        Ok(()) => tuples += 1,
                        Err(PipelineError::Exhausted) => acc.exhausted += 1,
                        Err(e) => acc.violations.push(format!("p={} q={} m={m} n={n}: {e}", fmt_rational(&lo), fmt_rational(&hi))),
                    }
                }
            }
            acc.samples = chk.checked;
            acc.unknowns = chk.uncertified;
            acc.notes.push(format!("tuples={tuples} K={}", p.config.k));
            let ties = chk.violations.iter().filter(|v| v.tie).count();
            if ties > 0 {
                acc.notes.push(format!("{ties} violations meet a strict bound with equality"));
            }
            acc.violations.extend(chk.violations.iter().map(|v| v.to_string()));
            acc
        }
        TaskKind::Transform { test, witness, rho, source, target } => {
            let (s, w) = (&env.tests[test], env.r(witness));
            let mut acc = Acc::new();
            let t = match rho {
                Some(rho) => match transform_total_test(s, w, rho, b) {
                    Ok(t) => t,
                    Err(e) => {
                        acc.violations.push(e.to_string());
                        return acc;
                    }
                },
                None => transform_test(s, w, b),
            };
            if !t.measures_exact() {
                acc.violations.push("some T_n has measure other than 2(c d_n + 2^-n)".to_string());
            }
            let rows = t.accounting();
            for r in &rows {
                if r.partial > r.bound {
                    acc.violations.push(format!("partial measure {} through n={} exceeds {}", fmt_rational(&r.partial), r.n, fmt_rational(&r.bound)));
                }
            }
            if rho.is_some() && t.undefined_count() > 0 {
                acc.violations.push(format!("{} undefined entries in the total variant", t.undefined_count()));
            }
            let hits = target.as_ref().map(|tg| check_fails_on(&t, env.real(tg), b));
            if let (Some(src), Some(tg)) = (source, target) {
                for n in unpropagated_hits(s, &t, env.real(src), env.real(tg), b) {
                    acc.violations.push(format!("certified hit of {src} by S_{n} does not propagate to T_{n}"));
                }
            }
            acc.samples = t.defined().count();
            acc.unknowns = t.unknown_count();
            acc.notes.push(format!(
                "c={} declared_bound={} partial_measure={} undefined={}",
                fmt_rational(&t.c),
                fmt_rational(&t.declared_bound),
                fmt_rational(&t.partial_measure()),
                t.undefined_count()
            ));
            if let Some((lo, hi)) = t.remaining_measure() {
                acc.notes.push(format!("remaining measure in [{}, {}]", fmt_rational(&lo), fmt_rational(&hi)));
            }
            if let Some(h) = &hits {
                acc.notes.push(format!("hits on {}: {}", h.real, h.count(Hit::Hit)));
            }
            let mut csv = String::from("n,l_n,r_n,defined,hit\n");
            for e in &t.entries {
                let (l, r) = e.interval().map_or((String::new(), String::new()), |i| (fmt_rational(i.lo()), fmt_rational(i.hi())));
                let hit = hits.as_ref().map_or("-", |h| hit_str(h.per_index.get(e.n)));
                let _ = writeln!(csv, "{},{l},{r},{},{hit}", e.n, e.interval().is_some());
            }
            acc.tables.push(("transform".to_string(), csv));
            let mut csv = String::from("N,partial_measure,bound\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{}", r.n, fmt_rational(&r.partial), fmt_rational(&r.bound));
            }
            acc.tables.push(("measure".to_string(), csv));
            acc
        }
        TaskKind::FailsOn { test, real, min_hits } => {
            let r = check_fails_on(&env.tests[test], env.real(real), b);
            let (hits, unknown) = (r.count(Hit::Hit), r.count(Hit::Unknown));
            let need = min_hits.unwrap_or(b.depth);
            let mut acc = Acc::new();
            acc.samples = r.per_index.len() - r.count(Hit::Absent);
            acc.unknowns = unknown;
            acc.notes.push(format!("hits={hits} required={need}"));
            if hits < need {
                if hits + unknown >= need {
                    acc.verdict = Some(Verdict::Inconclusive);
                } else {
                    let misses: Vec<String> =
                        r.per_index.iter().enumerate().filter(|(_, h)| **h == Hit::Miss).map(|(n, _)| n.to_string()).collect();
                    acc.violations.push(format!("{hits} hits, {need} required; certified misses at n = {}", misses.join(" ")));
                }
            }
            let mut csv = String::from("n,status\n");
            for (n, h) in r.per_index.iter().enumerate() {
                let _ = writeln!(csv, "{n},{}", hit_str(Some(h)));
            }
            acc.tables.push(("hits".to_string(), csv));
            acc
        }
        TaskKind::Prop4Measure => {
            let mut acc = Acc::new();
            let inst = match build_prop4_instance(b.depth) {
                Ok(i) => i,
                Err(e) => {
                    acc.violations.push(e.to_string());
                    return acc;
                }
            };
            let expect = (Rational::one() - pow2(-2 * b.depth as i64)) / Rational::from_integer(3.into());
            acc.samples = inst.intervals.len();
            if inst.partial_measure() != expect {
                acc.violations.push(format!("partial measure {} differs from {}", fmt_rational(&inst.partial_measure()), fmt_rational(&expect)));
            }
            match inst.validate() {
                Ok(k) => acc.notes.push(format!("beta*={} certified points={k}", fmt_rational(&inst.beta_star))),
                Err(e) => acc.violations.push(e.to_string()),
            }
            acc.notes.push(format!("partial measure {}", fmt_rational(&inst.partial_measure())));
            let mut csv = String::from("n,lo,hi\n");
            for (k, i) in inst.intervals.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{}", k + 1, fmt_rational(i.lo()), fmt_rational(i.hi()));
            }
            acc.tables.push(("intervals".to_string(), csv));
            acc
        }
    }
}

pub fn run_scenario(sc: &Scenario, ov: &Overrides) -> Result<Report, ScenarioError> {
    let over = |e: ScenarioError| match e {
        ScenarioError::Budget { message, .. } => ScenarioError::Budget { line: 0, message: format!("override: {message}") },
        e => e,
    };
    let defaults = BudgetDefaults {
        depth: ov.depth.map(|d| budget_depth(0, d)).transpose().map_err(over)?.unwrap_or(sc.budget.depth),
        fuel: ov.fuel.map(|f| budget_fuel(0, f)).transpose().map_err(over)?.unwrap_or(sc.budget.fuel),
    };
    let only = (!ov.tasks.is_empty()).then_some(ov.tasks.as_slice());
    let order = sc.order(only)?;
    let mut env = Env::new(sc)?;
    let mut tasks = Vec::new();
    for i in order {
        let t = &sc.tasks[i];
        let (depth, fuel) = (t.depth.unwrap_or(defaults.depth), t.fuel.unwrap_or(defaults.fuel));
        let b = Budget::new(fuel, depth, depth).map_err(|e| ScenarioError::Budget { line: t.line, message: e.to_string() })?;
        let mut acc = run_task(&mut env, t, &b);
        let verdict = acc.verdict();
        let outcome = match (t.expect, verdict) {
            (Verdict::Fail, Verdict::Fail) => Verdict::Pass,
            (Verdict::Fail, Verdict::Pass) => {
                acc.violations.push(format!("expected a failure; none among {} samples", acc.samples));
                Verdict::Fail
            }
            (_, v) => v,
        };
        tasks.push(TaskResult {
            name: t.name.clone(),
            kind: t.kind.name(),
            depth,
            fuel,
            expect: t.expect,
            verdict,
            outcome,
            samples: acc.samples,
            unknowns: acc.unknowns,
            exhausted: acc.exhausted,
            violations: acc.violations,
            notes: acc.notes,
            tables: acc.tables,
        });
    }
    Ok(Report { scenario: sc.name.clone(), defaults, tasks })
}

pub fn run_scenario_file(path: &Path, ov: &Overrides) -> Result<Report, ScenarioError> {
    run_scenario(&Scenario::load(path)?, ov)
}

/// Writes every table of one task as `<dir>/<task>.<table>.csv`.
pub fn emit_csv(report: &Report, task: &str, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    let t = report.task(task).ok_or_else(|| ScenarioError::UnknownTask(task.to_string()))?;
    let io = |p: &Path, e: std::io::Error| ScenarioError::Io { path: p.display().to_string(), message: e.to_string() };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut out = Vec::new();
    for (name, csv) in &t.tables {
        let path = dir.join(format!("{task}.{name}.csv"));
        std::fs::write(&path, csv).map_err(|e| io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
