use std::collections::BTreeMap;

use crate::kernel::{dyadic_nth, CanonicalRationals, Fuel, LeftCEApprox, OutOfFuel, Rational};

use super::{BaseOrder, QRule, QWitness};

#[derive(Debug, Clone)]
struct Base {
    order: BaseOrder,
    canon: CanonicalRationals,
    next: usize,
}

impl Base {
    fn new(order: BaseOrder) -> Self {
        Base { order, canon: CanonicalRationals::new(), next: 0 }
    }

    fn pull(&mut self) -> (usize, Rational) {
        let i = self.next;
        self.next += 1;
        let q = match self.order {
            BaseOrder::Canonical => self.canon.next().expect("canonical order is infinite"),
            BaseOrder::Dyadic => dyadic_nth(i),
        };
        (i, q)
    }
}

#[derive(Debug, Clone)]
enum Source {
    Table(Vec<Rational>),
    Total(Base),
    /// Base candidates released once a stream term passes them.
    Bounded { base: Base, stream: LeftCEApprox, inclusive: bool, stage: usize, pending: BTreeMap<Rational, usize> },
}

/// Lazy, resumable enumeration of a witness domain. Starts at `0` whenever
/// `0` belongs to the domain and the base order is used.
#[derive(Debug, Clone)]
pub struct DomainEnumerator {
    source: Source,
    emitted: Vec<Rational>,
}

impl DomainEnumerator {
    pub(super) fn new(w: &QWitness) -> Self {
        let base = Base::new(w.base);
        let source = match &w.rule {
            QRule::Table(t) => Source::Table(t.iter().map(|(x, _)| x.clone()).collect()),
            QRule::Interp(p) => Source::Bounded {
                base,
                stream: p.b().clone(),
                inclusive: false,
                stage: 0,
                pending: BTreeMap::new(),
            },
            QRule::StepBackward { b, .. } => {
                Source::Bounded { base, stream: b.clone(), inclusive: true, stage: 0, pending: BTreeMap::new() }
            }
            QRule::StepForward { a, .. } => {
                Source::Bounded { base, stream: a.clone(), inclusive: true, stage: 0, pending: BTreeMap::new() }
            }
            _ => Source::Total(base),
        };
        DomainEnumerator { source, emitted: Vec::new() }
    }

    pub fn prefix(&self) -> &[Rational] {
        &self.emitted
    }

    /// Grows the enumeration to at least `len` elements.
    pub fn extend_to(&mut self, len: usize, fuel: &mut Fuel) -> Result<(), OutOfFuel> {
        while self.emitted.len() < len {
            fuel.burn(1)?;
            match &mut self.source {
                Source::Table(keys) => {
                    let q = keys.get(self.emitted.len()).cloned().ok_or(OutOfFuel)?;
                    self.emitted.push(q);
                }
                Source::Total(base) => {
                    let (_, q) = base.pull();
                    self.emitted.push(q);
                }
                Source::Bounded { base, stream, inclusive, stage, pending } => {
                    let (i, q) = base.pull();
                    pending.insert(q, i);
                    // the stream advances with the bit length of the pull count, so
                    // every point below its limit is released, and terms stay small
                    let t = stream.term(*stage).map_err(|_| OutOfFuel)?;
                    if *stage < 2 * (usize::BITS - base.next.leading_zeros()) as usize {
                        *stage += 1;
                    }
                    // released in base order
                    let keep = if *inclusive {
                        let mut rest = pending.split_off(&t);
                        if let Some(i) = rest.remove(&t) {
                            pending.insert(t.clone(), i);
                        }
                        rest
                    } else {
                        pending.split_off(&t)
                    };
                    let mut ready: Vec<(usize, Rational)> =
                        std::mem::replace(pending, keep).into_iter().map(|(q, i)| (i, q)).collect();
                    ready.sort();
                    self.emitted.extend(ready.into_iter().map(|(_, q)| q));
                }
            }
        }
        Ok(())
    }

    pub fn get(&mut self, i: usize, fuel: &mut Fuel) -> Result<Rational, OutOfFuel> {
        self.extend_to(i + 1, fuel)?;
        Ok(self.emitted[i].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{int, rat, StreamRule};
    use std::collections::HashSet;

    #[test]
    fn total_domains_follow_base_order() {
        let w = QWitness::new("id", QRule::Affine { offset: int(0), slope: int(1) }, int(1));
        let mut e = w.domain_enumerator();
        e.extend_to(4, &mut Fuel::new(100)).unwrap();
        assert_eq!(e.prefix(), &[int(0), rat(1, 2), rat(1, 4), rat(3, 4)]);
        let mut c = w.clone().with_base(BaseOrder::Canonical).domain_enumerator();
        c.extend_to(4, &mut Fuel::new(100)).unwrap();
        assert_eq!(c.prefix(), &[int(0), rat(1, 2), rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn bounded_domains_stay_below_the_limit() {
        let a = LeftCEApprox::from_rule("a", StreamRule::Geometric { target: rat(1, 2), start: int(0), ratio: rat(1, 2) });
        let b = LeftCEApprox::from_rule("b", StreamRule::Geometric { target: rat(3, 4), start: int(0), ratio: rat(1, 2) });
        let w = QWitness::new("g", QRule::StepBackward { a, b }, int(1));
        let mut e = w.domain_enumerator();
        e.extend_to(40, &mut Fuel::new(10_000)).unwrap();
        assert_eq!(e.prefix()[0], int(0));
        let set: HashSet<_> = e.prefix().iter().cloned().collect();
        assert_eq!(set.len(), e.prefix().len());
        assert!(e.prefix().iter().all(|q| q < &rat(3, 4)));
    }

    #[test]
    fn finite_tables_exhaust() {
        let w = QWitness::new("t", QRule::Table(vec![(int(0), int(0)), (rat(1, 2), rat(1, 4))]), int(1));
        let mut e = w.domain_enumerator();
        assert_eq!(e.get(1, &mut Fuel::new(10)).unwrap(), rat(1, 2));
        assert_eq!(e.get(2, &mut Fuel::new(10)), Err(OutOfFuel));
    }
}
