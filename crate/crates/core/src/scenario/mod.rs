//! Scenario files: named reals, witnesses and tests, a list of tasks, and
//! budget defaults, in a line-oriented sectioned text format.
//!
//! ```text
//! # comment
//! [budget]
//! depth = 8
//! fuel = 4000000
//!
//! [reals]
//! alpha = leftce geometric 1/2 0 1/2
//!
//! [witnesses]
//! g = interp alpha beta 1 16
//!
//! [tests]
//! s = following beta 1 1/2
//!
//! [task check-g]
//! kind = solovay
//! witness = g
//! alpha = alpha
//! beta = beta
//! expect = pass
//! ```

mod run;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::constructions::Direction;
use crate::kernel::{parse_rational, Interval, Rational, StreamRule};
use crate::witnesses::Verdict;

pub use run::{emit_csv, run_scenario, run_scenario_file, Outcome, Overrides, Report, TaskResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unresolved reference `{name}`")]
    Unresolved { line: usize, name: String },
    #[error("line {line}: {message}")]
    Budget { line: usize, message: String },
    #[error("task dependencies form a cycle through `{0}`")]
    Cycle(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealSpec {
    Exact(Rational),
    LeftCE(StreamRule),
    Effective(StreamRule),
    /// The avoiding point of the separation instance at a depth.
    Prop4Beta(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessSpec {
    Interp { a: String, b: String, d: Rational, depth: usize },
    Affine { offset: Rational, slope: Rational, c: Rational },
    Constant { value: Rational, c: Rational },
    Table { c: Rational, points: Vec<(Rational, Rational)> },
    StepForward { a: String, b: String, c: Rational },
    StepBackward { a: String, b: String, c: Rational },
    MonotoneFrom { a: String, b: String, direction: Direction },
    Prop4 { depth: usize },
    /// Constant machine; cl-local on `[0, 1)` unless `open`.
    RConstant { value: Rational, open: bool },
    Piecewise { a: String, b: String, lipschitz: Rational },
    /// The real witness built from a rational one.
    H { of: String },
}

impl WitnessSpec {
    pub fn is_real(&self) -> bool {
        matches!(self, WitnessSpec::RConstant { .. } | WitnessSpec::Piecewise { .. } | WitnessSpec::H { .. })
    }

    fn real_refs(&self) -> Vec<&str> {
        match self {
            WitnessSpec::Interp { a, b, .. }
            | WitnessSpec::StepForward { a, b, .. }
            | WitnessSpec::StepBackward { a, b, .. }
            | WitnessSpec::MonotoneFrom { a, b, .. }
            | WitnessSpec::Piecewise { a, b, .. } => vec![a, b],
            _ => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestSpec {
    Finite(Vec<Interval>),
    Following { stream: String, width: Rational, ratio: Rational },
    Prop4,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskKind {
    Solovay { witness: String, alpha: String, beta: String },
    Lipschitz { witness: String, d: Rational },
    Monotone { witness: String, strict: bool },
    RWitness { witness: String, alpha: String, beta: String },
    Extract { witness: String, from: String, direction: Direction, target: Option<String>, output: Option<String> },
    Stages { witness: String, points: Vec<Rational>, levels: Vec<usize> },
    Claims { witness: String, alpha: String, beta: String, points: Vec<Rational>, levels: Vec<usize> },
    Transform { test: String, witness: String, rho: Option<Rational>, source: Option<String>, target: Option<String> },
    FailsOn { test: String, real: String, min_hits: Option<usize> },
    Prop4Measure,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Solovay { .. } => "solovay",
            TaskKind::Lipschitz { .. } => "lipschitz",
            TaskKind::Monotone { .. } => "monotone",
            TaskKind::RWitness { .. } => "r-witness",
            TaskKind::Extract { .. } => "extract",
            TaskKind::Stages { .. } => "stages",
            TaskKind::Claims { .. } => "claims",
            TaskKind::Transform { .. } => "transform",
            TaskKind::FailsOn { .. } => "fails-on",
            TaskKind::Prop4Measure => "prop4-measure",
        }
    }

    fn real_refs(&self) -> Vec<&str> {
        let mut v: Vec<&str> = Vec::new();
        match self {
            TaskKind::Solovay { alpha, beta, .. } | TaskKind::RWitness { alpha, beta, .. } | TaskKind::Claims { alpha, beta, .. } => {
                v.extend([alpha.as_str(), beta.as_str()])
            }
            TaskKind::Extract { from, target, .. } => {
                v.push(from);
                v.extend(target.as_deref());
            }
            TaskKind::Transform { source, target, .. } => {
                v.extend(source.as_deref());
                v.extend(target.as_deref());
            }
            TaskKind::FailsOn { real, .. } => v.push(real),
            _ => {}
        }
        v
    }

    fn witness_ref(&self) -> Option<(&str, Option<bool>)> {
        match self {
            TaskKind::Solovay { witness, .. }
            | TaskKind::Lipschitz { witness, .. }
            | TaskKind::Monotone { witness, .. }
            | TaskKind::Stages { witness, .. }
            | TaskKind::Claims { witness, .. } => Some((witness, Some(false))),
            TaskKind::RWitness { witness, .. } | TaskKind::Transform { witness, .. } => Some((witness, Some(true))),
            TaskKind::Extract { witness, .. } => Some((witness, None)),
            _ => None,
        }
    }

    fn test_ref(&self) -> Option<&str> {
        match self {
            TaskKind::Transform { test, .. } | TaskKind::FailsOn { test, .. } => Some(test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    pub expect: Verdict,
    pub depth: Option<usize>,
    pub fuel: Option<u64>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetDefaults {
    pub depth: usize,
    pub fuel: u64,
}

/// Upper limits on any single budget; a scenario asking for more is rejected.
pub const MAX_DEPTH: usize = 64;
pub const MAX_FUEL: u64 = 1 << 40;

impl Default for BudgetDefaults {
    fn default() -> Self {
        BudgetDefaults { depth: 8, fuel: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub budget: BudgetDefaults,
    pub reals: BTreeMap<String, RealSpec>,
    pub witnesses: BTreeMap<String, WitnessSpec>,
    pub tests: BTreeMap<String, TestSpec>,
    /// In file order.
    pub tasks: Vec<TaskSpec>,
}

enum Section {
    None,
    Budget,
    Reals,
    Witnesses,
    Tests,
    Task(usize),
}

struct Pending {
    name: String,
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
}

fn rational(line: usize, s: &str) -> Result<Rational, ScenarioError> {
    parse_rational(s).map_err(|_| parse_err(line, format!("bad rational `{s}`")))
}

fn number<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ScenarioError> {
    s.parse().map_err(|_| parse_err(line, format!("bad number `{s}`")))
}

fn direction(line: usize, s: &str) -> Result<Direction, ScenarioError> {
    match s {
        "forward" => Ok(Direction::Forward),
        "backward" => Ok(Direction::Backward),
        _ => Err(parse_err(line, format!("direction must be forward or backward, got `{s}`"))),
    }
}

fn rule(line: usize, words: &[&str]) -> Result<StreamRule, ScenarioError> {
    StreamRule::parse(&words.join(" ")).map_err(|_| parse_err(line, format!("bad stream rule `{}`", words.join(" "))))
}

fn parse_real(line: usize, words: &[&str]) -> Result<RealSpec, ScenarioError> {
    match words {
        ["exact", q] => Ok(RealSpec::Exact(rational(line, q)?)),
        ["leftce", rest @ ..] => Ok(RealSpec::LeftCE(rule(line, rest)?)),
        ["effective", rest @ ..] => Ok(RealSpec::Effective(rule(line, rest)?)),
        ["prop4-beta", d] => Ok(RealSpec::Prop4Beta(number(line, d)?)),
        _ => Err(parse_err(line, format!("unknown real `{}`", words.join(" ")))),
    }
}

fn parse_witness(line: usize, words: &[&str]) -> Result<WitnessSpec, ScenarioError> {
    let s = |w: &&str| w.to_string();
    match words {
        ["interp", a, b, d, depth] => Ok(WitnessSpec::Interp { a: s(a), b: s(b), d: rational(line, d)?, depth: number(line, depth)? }),
        ["affine", o, sl, c] => Ok(WitnessSpec::Affine { offset: rational(line, o)?, slope: rational(line, sl)?, c: rational(line, c)? }),
        ["constant", v, c] => Ok(WitnessSpec::Constant { value: rational(line, v)?, c: rational(line, c)? }),
        ["table", c, pts @ ..] if !pts.is_empty() => {
            let points = pts
                .iter()
                .map(|p| {
                    let (q, v) = p.split_once(':').ok_or_else(|| parse_err(line, format!("table point `{p}` is not q:value")))?;
                    Ok((rational(line, q)?, rational(line, v)?))
                })
                .collect::<Result<_, ScenarioError>>()?;
            Ok(WitnessSpec::Table { c: rational(line, c)?, points })
        }
        ["step-forward", a, b, c] => Ok(WitnessSpec::StepForward { a: s(a), b: s(b), c: rational(line, c)? }),
        ["step-backward", a, b, c] => Ok(WitnessSpec::StepBackward { a: s(a), b: s(b), c: rational(line, c)? }),
        ["monotone-from", a, b, dir] => Ok(WitnessSpec::MonotoneFrom { a: s(a), b: s(b), direction: direction(line, dir)? }),
        ["prop4", d] => Ok(WitnessSpec::Prop4 { depth: number(line, d)? }),
        ["r-constant", v] => Ok(WitnessSpec::RConstant { value: rational(line, v)?, open: false }),
        ["r-constant", v, "local"] => Ok(WitnessSpec::RConstant { value: rational(line, v)?, open: false }),
        ["r-constant", v, "open"] => Ok(WitnessSpec::RConstant { value: rational(line, v)?, open: true }),
        ["piecewise", a, b, l] => Ok(WitnessSpec::Piecewise { a: s(a), b: s(b), lipschitz: rational(line, l)? }),
        ["h", of] => Ok(WitnessSpec::H { of: s(of) }),
        _ => Err(parse_err(line, format!("unknown witness `{}`", words.join(" ")))),
    }
}

fn parse_test(line: usize, words: &[&str]) -> Result<TestSpec, ScenarioError> {
    match words {
        ["finite", ivs @ ..] if !ivs.is_empty() => {
            let list = ivs
                .iter()
                .map(|iv| {
                    let (lo, hi) = iv.split_once(':').ok_or_else(|| parse_err(line, format!("interval `{iv}` is not lo:hi")))?;
                    Interval::new(rational(line, lo)?, rational(line, hi)?).map_err(|_| parse_err(line, format!("interval `{iv}` is empty")))
                })
                .collect::<Result<_, _>>()?;
            Ok(TestSpec::Finite(list))
        }
        ["following", stream, w, r] => Ok(TestSpec::Following { stream: stream.to_string(), width: rational(line, w)?, ratio: rational(line, r)? }),
        ["prop4"] => Ok(TestSpec::Prop4),
        _ => Err(parse_err(line, format!("unknown test `{}`", words.join(" ")))),
    }
}

impl Pending {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.keys.remove(key)
    }

    fn need(&mut self, key: &str) -> Result<(usize, String), ScenarioError> {
        self.take(key).ok_or_else(|| parse_err(self.line, format!("task `{}` lacks `{key}`", self.name)))
    }

    fn name(&mut self, key: &str) -> Result<String, ScenarioError> {
        Ok(self.need(key)?.1)
    }

    fn opt_name(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(_, v)| v)
    }

    fn rationals(&mut self, key: &str) -> Result<Vec<Rational>, ScenarioError> {
        let (l, v) = self.need(key)?;
        v.split_whitespace().map(|w| rational(l, w)).collect()
    }

    fn levels(&mut self, key: &str) -> Result<Vec<usize>, ScenarioError> {
        let (l, v) = self.need(key)?;
        v.split_whitespace().map(|w| number(l, w)).collect()
    }

    fn finish(mut self) -> Result<TaskSpec, ScenarioError> {
        let (kl, kind) = self.need("kind")?;
        let kind = match kind.as_str() {
            "solovay" => TaskKind::Solovay { witness: self.name("witness")?, alpha: self.name("alpha")?, beta: self.name("beta")? },
            "lipschitz" => {
                let (l, d) = self.need("d")?;
                TaskKind::Lipschitz { witness: self.name("witness")?, d: rational(l, &d)? }
            }
            "monotone" => {
                let strict = match self.take("mode") {
                    None => false,
                    Some((_, m)) if m == "weak" => false,
                    Some((_, m)) if m == "strict" => true,
                    Some((l, m)) => return Err(parse_err(l, format!("mode must be weak or strict, got `{m}`"))),
                };
                TaskKind::Monotone { witness: self.name("witness")?, strict }
            }
            "r-witness" => TaskKind::RWitness { witness: self.name("witness")?, alpha: self.name("alpha")?, beta: self.name("beta")? },
            "extract" => {
                let (l, dir) = self.need("direction")?;
                TaskKind::Extract {
                    witness: self.name("witness")?,
                    from: self.name("from")?,
                    direction: direction(l, &dir)?,
                    target: self.opt_name("target"),
                    output: self.opt_name("output"),
                }
            }
            "stages" => TaskKind::Stages { witness: self.name("witness")?, points: self.rationals("points")?, levels: self.levels("levels")? },
            "claims" => TaskKind::Claims {
                witness: self.name("witness")?,
                alpha: self.name("alpha")?,
                beta: self.name("beta")?,
                points: self.rationals("points")?,
                levels: self.levels("levels")?,
            },
            "transform" => {
                let rho = match self.take("rho") {
                    Some((l, v)) => Some(rational(l, &v)?),
                    None => None,
                };
                TaskKind::Transform { test: self.name("test")?, witness: self.name("witness")?, rho, source: self.opt_name("source"), target: self.opt_name("target") }
            }
            "fails-on" => {
                let min_hits = match self.take("min-hits") {
                    Some((l, v)) => Some(number(l, &v)?),
                    None => None,
                };
                TaskKind::FailsOn { test: self.name("test")?, real: self.name("real")?, min_hits }
            }
            "prop4-measure" => TaskKind::Prop4Measure,
            other => return Err(parse_err(kl, format!("unknown task kind `{other}`"))),
        };
        let expect = match self.take("expect") {
            None => Verdict::Pass,
            Some((_, v)) if v == "pass" => Verdict::Pass,
            Some((_, v)) if v == "fail" => Verdict::Fail,
            Some((l, v)) => return Err(parse_err(l, format!("expect must be pass or fail, got `{v}`"))),
        };
        let depth = match self.take("depth") {
            Some((l, v)) => Some(budget_depth(l, number(l, &v)?)?),
            None => None,
        };
        let fuel = match self.take("fuel") {
            Some((l, v)) => Some(budget_fuel(l, number(l, &v)?)?),
            None => None,
        };
        if let Some((key, (l, _))) = self.keys.into_iter().next() {
            return Err(parse_err(l, format!("unknown key `{key}` for a {} task", kind.name())));
        }
        Ok(TaskSpec { name: self.name, kind, expect, depth, fuel, line: self.line })
    }
}

fn budget_depth(line: usize, d: usize) -> Result<usize, ScenarioError> {
    if d == 0 || d > MAX_DEPTH {
        return Err(ScenarioError::Budget { line, message: format!("depth {d} outside 1..={MAX_DEPTH}") });
    }
    Ok(d)
}

fn budget_fuel(line: usize, f: u64) -> Result<u64, ScenarioError> {
    if f == 0 || f > MAX_FUEL {
        return Err(ScenarioError::Budget { line, message: format!("fuel {f} outside 1..={MAX_FUEL}") });
    }
    Ok(f)
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Scenario {
    pub fn parse(name: &str, text: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario {
            name: name.to_string(),
            budget: BudgetDefaults::default(),
            reals: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            tests: BTreeMap::new(),
            tasks: Vec::new(),
        };
        let mut pending: Vec<Pending> = Vec::new();
        let mut lines: HashMap<String, usize> = HashMap::new();
        let mut section = Section::None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(head) = content.strip_prefix('[') {
                let head = head.strip_suffix(']').ok_or_else(|| parse_err(line, "unclosed section header"))?.trim();
                section = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
                    ["budget"] => Section::Budget,
                    ["reals"] => Section::Reals,
                    ["witnesses"] => Section::Witnesses,
                    ["tests"] => Section::Tests,
                    ["task", name] if valid_name(name) => {
                        if pending.iter().any(|p| p.name == *name) {
                            return Err(parse_err(line, format!("duplicate task `{name}`")));
                        }
                        pending.push(Pending { name: name.to_string(), line, keys: BTreeMap::new() });
                        Section::Task(pending.len() - 1)
                    }
                    _ => return Err(parse_err(line, format!("unknown section `[{head}]`"))),
                };
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| parse_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_name(key) {
                return Err(parse_err(line, format!("bad key `{key}`")));
            }
            let words: Vec<&str> = value.split_whitespace().collect();
            match section {
                Section::None => return Err(parse_err(line, "entry outside any section")),
                Section::Budget => match key {
                    "depth" => sc.budget.depth = budget_depth(line, number(line, value)?)?,
                    "fuel" => sc.budget.fuel = budget_fuel(line, number(line, value)?)?,
                    _ => return Err(parse_err(line, format!("unknown budget key `{key}`"))),
                },
                Section::Reals | Section::Witnesses | Section::Tests => {
                    if lines.insert(key.to_string(), line).is_some() {
                        return Err(parse_err(line, format!("`{key}` is already defined")));
                    }
                    match section {
                        Section::Reals => {
                            sc.reals.insert(key.to_string(), parse_real(line, &words)?);
                        }
                        Section::Witnesses => {
                            sc.witnesses.insert(key.to_string(), parse_witness(line, &words)?);
                        }
                        _ => {
                            sc.tests.insert(key.to_string(), parse_test(line, &words)?);
                        }
                    }
                }
                Section::Task(k) => {
                    if pending[k].keys.insert(key.to_string(), (line, value.to_string())).is_some() {
                        return Err(parse_err(line, format!("duplicate key `{key}`")));
                    }
                }
            }
        }
        sc.tasks = pending.into_iter().map(Pending::finish).collect::<Result<_, _>>()?;
        sc.validate(&lines)?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Scenario::parse(name, &text)
    }

    /// Reals produced by tasks, with the producing task.
    fn produced_reals(&self) -> BTreeMap<&str, &str> {
        self.tasks
            .iter()
            .filter_map(|t| match &t.kind {
                TaskKind::Extract { output: Some(o), .. } => Some((o.as_str(), t.name.as_str())),
                _ => None,
            })
            .collect()
    }

    fn validate(&self, lines: &HashMap<String, usize>) -> Result<(), ScenarioError> {
        let unresolved = |line: usize, name: &str| ScenarioError::Unresolved { line, name: name.to_string() };
        let at = |name: &String| lines.get(name).copied().unwrap_or(0);
        let leftce = |r: &str| matches!(self.reals.get(r), Some(RealSpec::LeftCE(_)));
        for (name, w) in &self.witnesses {
            for r in w.real_refs() {
                if !leftce(r) {
                    return Err(unresolved(at(name), &format!("{r} (a leftce real)")));
                }
            }
            if let WitnessSpec::H { of } = w {
                if self.witnesses.get(of).is_none_or(|o| o.is_real()) {
                    return Err(unresolved(at(name), &format!("{of} (a rational witness)")));
                }
            }
        }
        for (name, t) in &self.tests {
            if let TestSpec::Following { stream, .. } = t {
                if !leftce(stream) {
                    return Err(unresolved(at(name), &format!("{stream} (a leftce real)")));
                }
            }
        }
        let mut outputs = BTreeSet::new();
        for t in &self.tasks {
            if let TaskKind::Extract { output: Some(o), .. } = &t.kind {
                if self.reals.contains_key(o) || !outputs.insert(o.as_str()) {
                    return Err(parse_err(t.line, format!("real `{o}` is defined more than once")));
                }
            }
        }
        let produced = self.produced_reals();
        for t in &self.tasks {
            for r in t.kind.real_refs() {
                if !self.reals.contains_key(r) && !produced.contains_key(r) {
                    return Err(unresolved(t.line, r));
                }
            }
            if let TaskKind::Extract { from, .. } = &t.kind {
                if !leftce(from) && !produced.contains_key(from.as_str()) {
                    return Err(unresolved(t.line, &format!("{from} (a leftce real)")));
                }
            }
            if let Some((w, real)) = t.kind.witness_ref() {
                match self.witnesses.get(w) {
                    None => return Err(unresolved(t.line, w)),
                    Some(spec) if real.is_some_and(|r| r != spec.is_real()) => {
                        let want = if real == Some(true) { "a real witness" } else { "a rational witness" };
                        return Err(unresolved(t.line, &format!("{w} ({want})")));
                    }
                    _ => {}
                }
            }
            if let Some(s) = t.kind.test_ref() {
                if !self.tests.contains_key(s) {
                    return Err(unresolved(t.line, s));
                }
            }
        }
        self.order(None).map(|_| ())
    }

    /// Task indices in dependency order, file order among independent tasks;
    /// with a filter, only the named tasks and what they depend on.
    pub fn order(&self, only: Option<&[String]>) -> Result<Vec<usize>, ScenarioError> {
        let produced = self.produced_reals();
        let index: HashMap<&str, usize> = self.tasks.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
        let deps: Vec<BTreeSet<usize>> = self
            .tasks
            .iter()
            .map(|t| {
                let mut refs = t.kind.real_refs();
                if let TaskKind::Extract { from, .. } = &t.kind {
                    refs.push(from);
                }
                refs.iter().filter_map(|r| produced.get(r).map(|p| index[p])).collect()
            })
            .collect();
        let mut wanted = vec![only.is_none(); self.tasks.len()];
        if let Some(names) = only {
            let mut stack = Vec::new();
            for n in names {
                stack.push(*index.get(n.as_str()).ok_or_else(|| ScenarioError::UnknownTask(n.clone()))?);
            }
            while let Some(i) = stack.pop() {
                if !wanted[i] {
                    wanted[i] = true;
                    stack.extend(deps[i].iter().copied());
                }
            }
        }
        let mut done = vec![false; self.tasks.len()];
        let mut out = Vec::new();
        let total = wanted.iter().filter(|w| **w).count();
        while out.len() < total {
            let next = (0..self.tasks.len()).find(|&i| wanted[i] && !done[i] && deps[i].iter().all(|&d| done[d]));
            match next {
                Some(i) => {
                    done[i] = true;
                    out.push(i);
                }
                None => {
                    let stuck = (0..self.tasks.len()).find(|&i| wanted[i] && !done[i]).expect("some task remains");
                    return Err(ScenarioError::Cycle(self.tasks[stuck].name.clone()));
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSpec::Exact(q) => write!(f, "exact {}", crate::kernel::fmt_rational(q)),
            RealSpec::LeftCE(r) => write!(f, "leftce {r}"),
            RealSpec::Effective(r) => write!(f, "effective {r}"),
            RealSpec::Prop4Beta(d) => write!(f, "prop4-beta {d}"),
        }
    }
}

#[cfg(test)]
mod tests;
