use super::*;
use proptest::prelude::*;

use crate::constructions::piecewise_linear_r;
use crate::kernel::{int, rat, StreamRule};
use crate::type2::RFunctionMachine;
use crate::witnesses::make_constant_witness;

fn iv(lo: Rational, hi: Rational) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn budget(depth: usize) -> Budget {
    Budget::new(100_000, depth, depth).unwrap()
}

fn const_witness(v: Rational, c: Rational) -> RWitness {
    RWitness::new("k", RFunctionMachine::constant(v), c, RKind::ClOpen)
}

fn geo(target: Rational) -> LeftCEApprox {
    LeftCEApprox::from_rule("s", StreamRule::Geometric { target, start: int(0), ratio: rat(1, 2) })
}

#[test]
fn g_is_the_tolerance_query() {
    let w = const_witness(rat(1, 3), int(1));
    let r = tolerance_query_g(&w, &rat(1, 5), 5, &budget(4));
    assert_eq!(r.ok(), Some(&rat(1, 3)));
    assert_eq!(r.tolerance_index, 6);
}

#[test]
fn transformed_interval_formula() {
    let list = vec![iv(int(0), int(1)), iv(int(0), int(1)), iv(int(0), int(1)), iv(rat(1, 4), rat(3, 8))];
    let s = SolovayTest::finite("s", list);
    let t = transform_test(&s, &const_witness(rat(1, 2), int(2)), &budget(4));
    assert_eq!(t.entries[3].interval(), Some(&iv(rat(1, 8), rat(7, 8))));
    assert!(t.measures_exact());
}

#[test]
fn declared_bound_formula() {
    assert_eq!(transformed_bound(&int(2), &rat(1, 3)), rat(16, 3));
    let s = SolovayTest::finite("s", vec![iv(rat(1, 6), rat(1, 3)), iv(rat(1, 3), rat(1, 2))]);
    let t = transform_test(&s, &const_witness(int(0), int(2)), &budget(2));
    assert_eq!(t.declared_bound, rat(16, 3));
}

#[test]
fn degenerate_source_interval() {
    let s = SolovayTest::finite("s", vec![Interval::point(rat(1, 2)); 4]);
    let t = transform_test(&s, &const_witness(int(0), int(2)), &budget(4));
    for e in &t.entries {
        assert_eq!(e.interval().unwrap().measure(), int(2) * pow2(-(e.n as i64)));
    }
}

#[test]
fn undefined_and_unknown_are_distinct() {
    let s = SolovayTest::finite("s", vec![iv(rat(1, 2), rat(3, 4)), iv(rat(7, 8), int(1))]);
    // breakpoints stop at 3/4, so the machine has no output at 7/8
    let table = crate::type2::Breakpoints::Table(vec![(int(0), int(0)), (rat(3, 4), rat(3, 4))]);
    let m = RFunctionMachine::new(crate::type2::PiecewiseLinear::new(table, int(1)));
    let w = RWitness::new("pl", m, int(1), RKind::ClOpen);
    let t = transform_test(&s, &w, &budget(2));
    assert!(t.entries[0].interval().is_some());
    assert_eq!(t.entries[1].status, EntryStatus::Undefined);
    let starved = transform_test(&s, &w, &Budget::new(2, 2, 2).unwrap());
    assert_eq!(starved.unknown_count(), 2);
    assert_eq!(starved.undefined_count(), 0);
}

#[test]
fn truncation() {
    let rho = rat(1, 2);
    let w = make_constant_witness(rat(1, 4));
    let inside = SolovayTest::finite("in", vec![iv(int(0), rat(1, 4)), iv(rat(1, 8), rat(3, 8))]);
    let a = transform_total_test(&inside, &w, &rho, &budget(2)).unwrap();
    let b = transform_test(&inside, &w, &budget(2));
    assert_eq!(a.entries, b.entries);
    assert_eq!(a.undefined_count() + a.unknown_count(), 0);

    let straddle = SolovayTest::finite("x", vec![iv(&rho - rat(1, 8), &rho + rat(1, 8))]);
    let t = transform_total_test(&straddle, &w, &rho, &budget(1)).unwrap();
    assert_eq!(t.entries[0].source.measure(), rat(1, 8));
    assert_eq!(t.truncated_away, rat(1, 8));
}

#[test]
fn total_transformer_preconditions() {
    let s = SolovayTest::finite("s", vec![iv(int(0), rat(1, 4))]);
    let w = make_constant_witness(rat(1, 4));
    assert!(matches!(transform_total_test(&s, &w, &int(1), &budget(1)), Err(RandomnessError::RhoNotBelowBound { .. })));
    assert!(matches!(transform_total_test(&s, &const_witness(int(0), int(1)), &rat(1, 2), &budget(1)), Err(RandomnessError::NotLocal(_))));
    let f = s.with_finite_bound();
    assert_eq!(transform_total_test(&f, &w, &rat(1, 2), &budget(1)).unwrap_err(), RandomnessError::NotComputableMeasure);
}

#[test]
fn total_measure_within_the_geometric_tail() {
    // d_n = 2^-(n+3), L_comp = 1/4
    let s = SolovayTest::following("s", geo(rat(1, 4)), rat(1, 8), rat(1, 2)).unwrap();
    assert_eq!(s.declared_bound, rat(1, 4));
    let w = RWitness::new("id", RFunctionMachine::identity(), int(1), RKind::ClLocal { bound: int(1) });
    let t = transform_total_test(&s, &w, &rat(1, 2), &budget(12)).unwrap();
    assert_eq!(t.declared_bound, rat(9, 2));
    let (lo, hi) = t.remaining_measure().unwrap();
    let gap = &t.declared_bound - t.partial_measure();
    assert!(lo <= gap && gap <= hi, "{gap} vs [{lo},{hi}]");
    // remaining: sum_{n>11} 2^(1-n) = 2^-10, plus 2c * tail(11)
    assert_eq!(gap, pow2(-10) + int(2) * s.tail(11).unwrap());
}

#[test]
fn hit_counting() {
    let half = RealName::exact("half", rat(1, 2));
    let nested = SolovayTest::from_fn(
        "nested",
        |n| Interval::around(&rat(1, 2), &pow2(-(n as i64) - 1)).ok(),
        MeasureKind::FiniteBound,
        int(2),
    );
    let r = check_fails_on(&nested, &half, &budget(10));
    assert_eq!(r.count(Hit::Hit), 10);

    let far = SolovayTest::finite("far", vec![iv(int(0), rat(1, 4)), iv(rat(3, 4), int(1))]);
    let r = check_fails_on(&far, &half, &budget(2));
    assert_eq!(r.count(Hit::Hit), 0);
    assert_eq!(r.count(Hit::Miss), 2);

    let vague = RealName::leftce("v", geo(rat(1, 2))).without_exact();
    assert_eq!(check_fails_on(&far, &vague, &budget(2)).count(Hit::Hit), 0);
}

#[test]
fn source_hits_propagate() {
    let (a, b) = (geo(rat(1, 2)), LeftCEApprox::from_rule("b", StreamRule::Geometric { target: rat(3, 4), start: int(0), ratio: rat(1, 2) }));
    let w = piecewise_linear_r(&a, &b, int(3));
    let s = SolovayTest::following("s", b.clone(), int(1), rat(1, 2)).unwrap();
    let (alpha, beta) = (RealName::leftce("alpha", a), RealName::leftce("beta", b));
    let bud = budget(12);
    let t = transform_test(&s, &w, &bud);
    let src = check_fails_on(&s, &beta, &bud);
    assert_eq!(src.count(Hit::Hit), 12);
    assert!(unpropagated_hits(&s, &t, &beta, &alpha, &bud).is_empty());
    // exact alpha lies in T_n with no slack at all
    assert_eq!(check_fails_on(&t, &alpha, &bud).count(Hit::Hit), 12);
}

#[test]
fn hit_reports_are_deterministic() {
    let b = geo(rat(3, 4));
    let s = SolovayTest::following("s", b.clone(), int(1), rat(1, 2)).unwrap();
    let beta = RealName::leftce("beta", b);
    assert_eq!(check_fails_on(&s, &beta, &budget(8)), check_fails_on(&s, &beta, &budget(8)));
}

fn arb_interval() -> impl Strategy<Value = Interval> {
    (0i64..64, 0i64..16).prop_map(|(lo, len)| iv(rat(lo, 64), rat(lo + len, 64)))
}

proptest! {
    #[test]
    fn bookkeeping_holds(list in prop::collection::vec(arb_interval(), 1..12), v in 0i64..64, c in 1i64..4) {
        let s = SolovayTest::finite("s", list.clone());
        let w = const_witness(rat(v, 64), int(c));
        let t = transform_test(&s, &w, &budget(list.len()));
        prop_assert!(t.measures_exact());
        let rows = t.accounting();
        for r in &rows {
            let src = s.partial_measure(r.n + 1);
            let tail: Rational = pow2(1 - r.n as i64);
            prop_assert!(r.partial <= transformed_bound(&int(c), &src) + tail);
            prop_assert!(r.partial <= r.bound);
        }
        prop_assert_eq!(rows.len(), list.len());
    }

    #[test]
    fn total_variant_never_undefined(list in prop::collection::vec(arb_interval(), 1..12), rho in 1i64..63) {
        let s = SolovayTest::finite("s", list.clone());
        let w = make_constant_witness(rat(1, 3));
        let t = transform_total_test(&s, &w, &rat(rho, 64), &budget(list.len())).unwrap();
        prop_assert_eq!(t.undefined_count(), 0);
        prop_assert!(t.measures_exact());
        prop_assert!(t.entries.iter().all(|e| e.source.hi() <= &rat(rho, 64)));
    }
}
