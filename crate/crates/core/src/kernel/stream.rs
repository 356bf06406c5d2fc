use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};

use super::{fmt_rational, in_unit_interval, parse_rational, pow2, KernelError, Rational};

/// Rule behind a named stream. Rules are total unless they are finite tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamRule {
    /// `target - (target - start) * ratio^n`, strictly increasing for
    /// `start < target` and `0 < ratio < 1`.
    Geometric { target: Rational, start: Rational, ratio: Rational },
    /// `sum_{k=1..n} base^-(k^2)`; irrational limit, explicit tail bound.
    Lacunary { base: u32 },
    Constant(Rational),
    Table(Vec<Rational>),
}

impl StreamRule {
    pub fn term(&self, n: usize) -> Option<Rational> {
        match self {
            StreamRule::Geometric { target, start, ratio } => {
                let mut r = Rational::one();
                for _ in 0..n {
                    r *= ratio;
                }
                Some(target - (target - start) * r)
            }
            StreamRule::Lacunary { base } => {
                let b = Rational::from_integer((*base).into());
                let mut acc = Rational::zero();
                for k in 1..=n {
                    let mut p = Rational::one();
                    for _ in 0..k * k {
                        p /= &b;
                    }
                    acc += p;
                }
                Some(acc)
            }
            StreamRule::Constant(q) => Some(q.clone()),
            StreamRule::Table(v) => v.get(n).cloned(),
        }
    }

    /// The exact limit, when the rule has a rational one.
    pub fn known_limit(&self) -> Option<Rational> {
        match self {
            StreamRule::Geometric { target, .. } => Some(target.clone()),
            StreamRule::Constant(q) => Some(q.clone()),
            _ => None,
        }
    }

    /// An upper bound on the limit certified from stage `n`, for increasing rules.
    pub fn upper_bound(&self, n: usize) -> Option<Rational> {
        match self {
            StreamRule::Geometric { target, .. } => Some(target.clone()),
            StreamRule::Constant(q) => Some(q.clone()),
            StreamRule::Lacunary { base } => {
                // tail sum_{k>n} base^-(k^2) < 2 * base^-((n+1)^2) for base >= 2
                let b = Rational::from_integer((*base).into());
                let mut p = Rational::from_integer(2.into());
                for _ in 0..(n + 1) * (n + 1) {
                    p /= &b;
                }
                Some(self.term(n)? + p)
            }
            StreamRule::Table(_) => None,
        }
    }

    pub fn parse(s: &str) -> Result<StreamRule, KernelError> {
        let mut words = s.split_whitespace();
        let head = words.next().ok_or_else(|| KernelError::Parse(s.to_string()))?;
        let args: Vec<&str> = words.collect();
        let bad = || KernelError::Parse(s.to_string());
        match (head, args.as_slice()) {
            ("geometric", [t, st, r]) => Ok(StreamRule::Geometric {
                target: parse_rational(t)?,
                start: parse_rational(st)?,
                ratio: parse_rational(r)?,
            }),
            ("lacunary", [b]) => {
                let base: u32 = b.parse().map_err(|_| bad())?;
                if base < 2 {
                    return Err(bad());
                }
                Ok(StreamRule::Lacunary { base })
            }
            ("constant", [q]) => Ok(StreamRule::Constant(parse_rational(q)?)),
            ("table", vals) if !vals.is_empty() => {
                Ok(StreamRule::Table(vals.iter().map(|v| parse_rational(v)).collect::<Result<_, _>>()?))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for StreamRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamRule::Geometric { target, start, ratio } => write!(
                f,
                "geometric {} {} {}",
                fmt_rational(target),
                fmt_rational(start),
                fmt_rational(ratio)
            ),
            StreamRule::Lacunary { base } => write!(f, "lacunary {base}"),
            StreamRule::Constant(q) => write!(f, "constant {}", fmt_rational(q)),
            StreamRule::Table(v) => {
                write!(f, "table")?;
                for q in v {
                    write!(f, " {}", fmt_rational(q))?;
                }
                Ok(())
            }
        }
    }
}

type Generator = Arc<dyn Fn(usize) -> Option<Rational> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Discipline {
    Effective,
    StrictlyIncreasing,
}

/// Memoized generator. The cache sits behind a mutex so concurrent readers
/// always see a consistent, validated prefix.
#[derive(Clone)]
struct Memo {
    label: String,
    rule: Option<StreamRule>,
    gen: Generator,
    cache: Arc<Mutex<Vec<Rational>>>,
    discipline: Discipline,
}

impl Memo {
    fn new(label: String, rule: Option<StreamRule>, gen: Generator, discipline: Discipline) -> Self {
        Memo { label, rule, gen, cache: Arc::new(Mutex::new(Vec::new())), discipline }
    }

    fn term(&self, n: usize) -> Result<Rational, KernelError> {
        let mut cache = self.cache.lock().expect("stream cache poisoned");
        while cache.len() <= n {
            let k = cache.len();
            let next = (self.gen)(k).ok_or_else(|| KernelError::StreamEnded { label: self.label.clone(), index: k })?;
            if !in_unit_interval(&next) {
                return Err(KernelError::NotInUnitInterval(fmt_rational(&next)));
            }
            if let Some(prev) = cache.last() {
                match self.discipline {
                    Discipline::Effective => {
                        if (&next - prev).abs() >= pow2(1 - k as i64) {
                            return Err(KernelError::NotEffective { index: k - 1 });
                        }
                    }
                    Discipline::StrictlyIncreasing => {
                        if &next <= prev {
                            return Err(KernelError::NotIncreasing { index: k });
                        }
                    }
                }
            }
            cache.push(next);
        }
        Ok(cache[n].clone())
    }

    fn prefix(&self, len: usize) -> Result<Vec<Rational>, KernelError> {
        if len > 0 {
            self.term(len - 1)?;
        }
        Ok(self.cache.lock().expect("stream cache poisoned")[..len].to_vec())
    }
}

/// A rational stream with `|q_n - q_{n+1}| < 2^-n`, values in `[0,1)`.
#[derive(Clone)]
pub struct EffectiveApprox {
    memo: Memo,
}

impl EffectiveApprox {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> Option<Rational> + Send + Sync + 'static,
    {
        EffectiveApprox { memo: Memo::new(label.into(), None, Arc::new(f), Discipline::Effective) }
    }

    pub fn from_rule(label: impl Into<String>, rule: StreamRule) -> Self {
        let r = rule.clone();
        EffectiveApprox { memo: Memo::new(label.into(), Some(rule), Arc::new(move |n| r.term(n)), Discipline::Effective) }
    }

    /// The constant oracle `(q, q, ...)`.
    pub fn constant(q: Rational) -> Result<Self, KernelError> {
        if !in_unit_interval(&q) {
            return Err(KernelError::NotInUnitInterval(fmt_rational(&q)));
        }
        Ok(Self::from_rule(format!("const {}", fmt_rational(&q)), StreamRule::Constant(q)))
    }

    pub fn label(&self) -> &str {
        &self.memo.label
    }

    pub fn rule(&self) -> Option<&StreamRule> {
        self.memo.rule.as_ref()
    }

    pub fn term(&self, n: usize) -> Result<Rational, KernelError> {
        self.memo.term(n)
    }

    pub fn prefix(&self, len: usize) -> Result<Vec<Rational>, KernelError> {
        self.memo.prefix(len)
    }
}

impl fmt::Debug for EffectiveApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EffectiveApprox({})", self.memo.label)
    }
}

/// A strictly increasing rational stream in `[0,1)`.
#[derive(Clone)]
pub struct LeftCEApprox {
    memo: Memo,
}

impl LeftCEApprox {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> Option<Rational> + Send + Sync + 'static,
    {
        LeftCEApprox { memo: Memo::new(label.into(), None, Arc::new(f), Discipline::StrictlyIncreasing) }
    }

    pub fn from_rule(label: impl Into<String>, rule: StreamRule) -> Self {
        let r = rule.clone();
        LeftCEApprox {
            memo: Memo::new(label.into(), Some(rule), Arc::new(move |n| r.term(n)), Discipline::StrictlyIncreasing),
        }
    }

    pub fn from_terms(label: impl Into<String>, terms: Vec<Rational>) -> Self {
        Self::from_rule(label, StreamRule::Table(terms))
    }

    pub fn label(&self) -> &str {
        &self.memo.label
    }

    pub fn rule(&self) -> Option<&StreamRule> {
        self.memo.rule.as_ref()
    }

    pub fn term(&self, n: usize) -> Result<Rational, KernelError> {
        self.memo.term(n)
    }

    pub fn prefix(&self, len: usize) -> Result<Vec<Rational>, KernelError> {
        self.memo.prefix(len)
    }

    pub fn known_limit(&self) -> Option<Rational> {
        self.rule().and_then(StreamRule::known_limit)
    }

    pub fn upper_bound(&self, n: usize) -> Option<Rational> {
        self.rule().and_then(|r| r.upper_bound(n))
    }
}

impl fmt::Debug for LeftCEApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LeftCEApprox({})", self.memo.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat, validate_effective};

    #[test]
    fn effective_checks_every_extension() {
        let ok = EffectiveApprox::from_fn("half", |k| Some(rat(1, 2) - pow2(-(k as i64) - 1)));
        assert!(validate_effective(&ok.prefix(20).unwrap()).is_valid());

        // jumps by exactly 2^-k at step k
        let bad = EffectiveApprox::from_fn("bad", |k| Some(if k < 3 { int(0) } else { rat(1, 4) }));
        assert_eq!(bad.term(3), Err(KernelError::NotEffective { index: 2 }));

        assert!(EffectiveApprox::constant(int(1)).is_err());
    }

    #[test]
    fn leftce_rejects_plateaus_and_overflow() {
        let t = LeftCEApprox::from_terms("t", vec![int(0), rat(1, 4), rat(1, 4)]);
        assert_eq!(t.term(2), Err(KernelError::NotIncreasing { index: 2 }));
        assert!(matches!(t.term(1), Ok(_)));
        let g = LeftCEApprox::from_rule(
            "g",
            StreamRule::Geometric { target: int(1), start: int(0), ratio: rat(1, 2) },
        );
        assert_eq!(g.prefix(3).unwrap(), vec![int(0), rat(1, 2), rat(3, 4)]);
        let short = LeftCEApprox::from_terms("s", vec![int(0)]);
        assert!(matches!(short.term(1), Err(KernelError::StreamEnded { .. })));
    }

    #[test]
    fn lacunary_upper_bound_is_sound() {
        let r = StreamRule::Lacunary { base: 2 };
        let far = r.term(6).unwrap();
        for n in 0..5 {
            assert!(r.upper_bound(n).unwrap() > far);
            assert!(r.term(n).unwrap() < far);
        }
    }

    #[test]
    fn rule_text_roundtrip() {
        for s in ["geometric 1/2 0/1 1/2", "lacunary 3", "constant 1/3", "table 0/1 1/4 3/8"] {
            assert_eq!(StreamRule::parse(s).unwrap().to_string(), s);
        }
        assert!(StreamRule::parse("lacunary 1").is_err());
        assert!(StreamRule::parse("spiral 3").is_err());
    }
}
