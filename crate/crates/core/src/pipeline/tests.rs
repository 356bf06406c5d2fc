use super::claims::ClaimChecker;
use super::reference::{brute_force_p, naive_f, naive_ftilde, naive_gtilde, search_p_in_prefix};
use super::*;
use num_traits::Signed;
use proptest::prelude::*;

use crate::constructions::{interp_q_witness, PairedApproximations};
use crate::kernel::{int, rat, validate_effective, EffectiveApprox, LeftCEApprox, StreamRule};
use crate::type2::{query_constant, run_outputs};
use crate::witnesses::{check_r_witness, QRule, RealName, Verdict};

fn table(points: &[(Rational, Rational)]) -> QWitness {
    QWitness::new("t", QRule::Table(points.to_vec()), int(1))
}

fn fuel() -> Fuel {
    Fuel::new(10_000_000)
}

fn geo(label: &str, target: Rational) -> LeftCEApprox {
    LeftCEApprox::from_rule(label, StreamRule::Geometric { target, start: int(0), ratio: rat(1, 2) })
}

/// alpha = 1/2 from beta = 3/4 with d = 1.
fn interp_instance() -> (QWitness, RealName, RealName) {
    let (a, b) = (geo("a", rat(1, 2)), geo("b", rat(3, 4)));
    let p = PairedApproximations::new(a.clone(), b.clone(), int(1), 16).unwrap();
    (interp_q_witness(&p), RealName::leftce("alpha", a), RealName::leftce("beta", b))
}

#[test]
fn minimal_k() {
    let k = |c: Rational| PipelineConfig::new(&c, DomainBound::One).unwrap().k;
    assert_eq!(k(int(1)), 2);
    assert_eq!(k(rat(7, 2)), 2);
    assert_eq!(k(int(4)), 3);
    assert_eq!(k(int(5)), 3);
    assert_eq!(PipelineConfig::new(&int(0), DomainBound::One).unwrap_err(), PipelineError::NonPositiveConstant);
}

#[test]
fn gtilde_examples() {
    let w = table(&[(int(0), rat(1, 10)), (rat(3, 5), rat(1, 2)), (rat(3, 10), rat(1, 5))]);
    let b = Budget::new(1000, 3, 3).unwrap();
    assert_eq!(gtilde(&w, 2, &b).unwrap(), rat(1, 5));
    assert_eq!(gtilde(&w, 1, &b).unwrap(), rat(1, 2));
    assert_eq!(gtilde(&w, 0, &b).unwrap(), rat(1, 10));
    assert_eq!(gtilde(&w, 3, &b).unwrap_err(), PipelineError::DomainEnded(3));
}

#[test]
fn enumeration_must_start_at_zero() {
    let w = table(&[(rat(1, 2), int(0))]);
    assert!(matches!(gtilde(&w, 0, &Budget::new(100, 1, 1).unwrap()), Err(PipelineError::ZeroNotFirst(_))));
}

#[test]
fn chain_search_examples() {
    let prefix = [int(0), rat(2, 5), rat(7, 10)];
    let w = table(&prefix.iter().map(|q| (q.clone(), int(0))).collect::<Vec<_>>());
    let p = Pipeline::new(&w).unwrap();
    let c = p.search_p(&rat(9, 10), 1, &mut fuel()).unwrap();
    assert_eq!(c.values, prefix.to_vec());
    assert_eq!(brute_force_p(&prefix, &rat(9, 10), 1), Some((2, vec![0, 1, 2])));
    assert_eq!(p.search_p(&int(0), 7, &mut fuel()).unwrap().values, vec![int(0)]);

    let lone = Pipeline::new(&table(&[(int(0), int(0))])).unwrap();
    assert_eq!(lone.search_p(&rat(3, 4), 1, &mut fuel()).unwrap_err(), PipelineError::Exhausted);
    assert_eq!(brute_force_p(&[int(0)], &rat(3, 4), 1), None);
    assert_eq!(p.search_p(&rat(-1, 4), 1, &mut fuel()).unwrap_err(), PipelineError::Exhausted);
}

#[test]
fn f_and_ftilde_examples() {
    let pts = [(int(0), rat(1, 10)), (rat(2, 5), rat(1, 2)), (rat(7, 10), rat(3, 5))];
    let w = table(&pts);
    let cfg = PipelineConfig { c: int(1), k: 1, d: int(2), domain_bound: DomainBound::One };
    let p = Pipeline::with_config(&w, cfg);
    let s = p.stage(&rat(9, 10), 1, &mut fuel()).unwrap();
    assert_eq!(s.f, int(1));
    let prefix: Vec<Rational> = pts.iter().map(|x| x.0.clone()).collect();
    let gt: Vec<Rational> = pts.iter().map(|x| x.1.clone()).collect();
    let expect = [int(0), rat(2, 5), rat(7, 10), rat(9, 10)]
        .iter()
        .map(|q| naive_f(&prefix, &gt, &int(2), q, 1).unwrap())
        .max()
        .unwrap();
    assert_eq!(s.ftilde, expect);
    // the chain is fixed at step 1, before 7/10 is enumerated
    let s = p.stage(&rat(7, 10), 1, &mut fuel()).unwrap();
    assert_eq!(s.chain.values, vec![int(0), rat(2, 5)]);
    assert_eq!(s.f, rat(11, 10));
    assert_eq!(Some(s.f), naive_f(&prefix, &gt, &int(2), &rat(7, 10), 1));
    // singleton chain
    let s = p.stage(&rat(1, 4), 1, &mut fuel()).unwrap();
    assert_eq!(s.chain.values, vec![int(0)]);
    let f0 = p.stage(&int(0), 1, &mut fuel()).unwrap().f;
    assert_eq!(s.ftilde, std::cmp::max(f0, s.f));
}

#[test]
fn stage_functions_on_a_fixed_instance() {
    let (w, alpha, beta) = interp_instance();
    let p = Pipeline::new(&w).unwrap();
    let q = rat(5, 8);
    let f2 = p.stage(&q, 2, &mut fuel()).unwrap();
    let f4 = p.stage(&q, 4, &mut fuel()).unwrap();
    let diff = &f2.f - &f4.f;
    assert!(diff >= Rational::zero() && diff < pow2(-(2 - p.config.k as i64)));
    let mut chk = ClaimChecker::new(&p, &alpha, &beta, 20);
    chk.check(&rat(1, 4), &q, 2, 4, &mut fuel()).unwrap();
    assert!(chk.violations_besides_ties_of(17).is_empty(), "{:?}", chk.violations);
    assert!(chk.checked > 10);
}

#[test]
fn claims_hold_on_sampled_tuples() {
    let (w, alpha, beta) = interp_instance();
    let p = Pipeline::new(&w).unwrap();
    let mut chk = ClaimChecker::new(&p, &alpha, &beta, 24);
    let qs: Vec<Rational> = (0..16).map(|i| rat(i, 20)).collect();
    for n in 2..8 {
        for m in 1..n {
            for (i, q) in qs.iter().enumerate().skip(1).step_by(3) {
                chk.check(&qs[i / 2], q, m, n, &mut fuel()).unwrap();
            }
        }
    }
    assert!(chk.violations_besides_ties_of(17).is_empty(), "{:?}", chk.violations);
}

#[test]
fn lipschitz_stage_bound_is_attained() {
    let (w, alpha, beta) = interp_instance();
    let p = Pipeline::new(&w).unwrap();
    let (a, b) = (int(0), rat(1, 20));
    let sa = p.stage(&a, 2, &mut fuel()).unwrap();
    let sb = p.stage(&b, 2, &mut fuel()).unwrap();
    assert_eq!(sa.chain.values, sb.chain.values);
    assert_eq!(&sb.f - &sa.f, &p.config.d * (&b - &a));
    let mut chk = ClaimChecker::new(&p, &alpha, &beta, 20);
    chk.check(&a, &b, 1, 2, &mut fuel()).unwrap();
    assert!(chk.violations.iter().any(|v| v.claim == 17 && v.tie));
}

#[test]
fn fuel_growth_never_shrinks_the_chain() {
    let prefix: Vec<Rational> = [0, 8, 4, 12, 2, 6, 10, 14].iter().map(|&k| rat(k, 16)).collect();
    let q = rat(7, 8);
    let mut last: Option<(usize, Vec<usize>)> = None;
    for len in 1..=prefix.len() {
        let now = search_p_in_prefix(&prefix[..len], &q, 2);
        if let Some(prev) = &last {
            assert_eq!(now.as_ref(), Some(prev));
        }
        if now.is_some() {
            last = now;
        }
    }
    assert!(last.is_some());
}

#[test]
fn h_approximates_the_identity() {
    let w = QWitness::new("id", QRule::Affine { offset: int(0), slope: int(1) }, int(1));
    let h = h_machine(Arc::new(Pipeline::new(&w).unwrap()));
    assert_eq!(h.kind, RKind::ClLocal { bound: int(1) });
    let b = Budget::new(50_000_000, 6, 6).unwrap();
    for x in [int(0), rat(1, 3), rat(1, 2), rat(5, 7)] {
        let v = query_constant(&h.machine, &x, 6, &b).value.unwrap();
        assert!((v - &x).abs() < pow2(-5), "{x}");
    }
}

#[test]
fn h_of_a_constant_target() {
    let w = QWitness::new("k", QRule::Constant(rat(1, 3)), int(1));
    let h = h_machine(Arc::new(Pipeline::new(&w).unwrap()));
    let b = Budget::new(50_000_000, 5, 5).unwrap();
    for x in [rat(1, 8), rat(1, 2), rat(3, 4)] {
        let v = query_constant(&h.machine, &x, 5, &b).value.unwrap();
        assert!((v - rat(1, 3)).abs() < pow2(-4));
    }
}

#[test]
fn h_outputs_form_an_effective_approximation() {
    let (w, _, _) = interp_instance();
    let h = h_machine(Arc::new(Pipeline::new(&w).unwrap()));
    assert_eq!(h.kind, RKind::ClOpen);
    assert_eq!(h.constant_c, int(4));
    let x = EffectiveApprox::from_fn("x", |k| Some(rat(1, 2) - pow2(-(k as i64) - 3)));
    let (out, status) = run_outputs(&h.machine, &x, 7, &Budget::new(50_000_000, 7, 7).unwrap()).unwrap();
    assert_eq!(status, crate::type2::QueryStatus::Ok);
    assert!(validate_effective(&out).is_valid());
}

#[test]
fn h_passes_the_real_witness_check() {
    let (w, alpha, beta) = interp_instance();
    let h = h_machine(Arc::new(Pipeline::new(&w).unwrap()));
    let r = check_r_witness(&h, &alpha, &beta, &Budget::new(100_000_000, 6, 6).unwrap());
    assert_eq!(r.verdict, Verdict::Pass, "{r}");
}

#[test]
fn stage_csv_rows() {
    let (w, _, _) = interp_instance();
    let p = Pipeline::new(&w).unwrap();
    let rows = vec![p.stage(&rat(1, 4), 2, &mut fuel()).unwrap()];
    let csv = stage_csv(&rows);
    assert!(csv.starts_with("q,n,p_size,f,ftilde\n1/4,2,"));
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

fn arb_enumeration() -> impl Strategy<Value = Vec<(Rational, Rational)>> {
    prop::collection::btree_set(1i64..32, 0..11).prop_flat_map(|keys| {
        let len = keys.len() + 1;
        (Just(keys), prop::collection::vec(0i64..16, len), Just(()).prop_perturb(|_, mut rng| rng.random::<u64>()))
            .prop_map(|(keys, gs, seed)| {
                let mut pts: Vec<i64> = keys.into_iter().collect();
                // deterministic shuffle so the order is not the value order
                let n = pts.len();
                for i in (1..n).rev() {
                    let j = (seed.rotate_left(i as u32) as usize) % (i + 1);
                    pts.swap(i, j);
                }
                std::iter::once(0).chain(pts).zip(gs).map(|(k, g)| (rat(k, 32), rat(g, 16))).collect()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_matches_brute_force(pts in arb_enumeration(), q in 0i64..36, n in 1usize..5) {
        let prefix: Vec<Rational> = pts.iter().map(|x| x.0.clone()).collect();
        let q = rat(q, 32);
        let expect = brute_force_p(&prefix, &q, n);
        prop_assert_eq!(search_p_in_prefix(&prefix, &q, n), expect.clone());
        let p = Pipeline::new(&table(&pts)).unwrap();
        match (p.search_p(&q, n, &mut fuel()), expect) {
            (Ok(c), Some((t, idx))) => {
                prop_assert_eq!(c.step, t);
                prop_assert_eq!(c.indices, idx);
            }
            (Err(PipelineError::Exhausted), None) => {}
            (got, want) => prop_assert!(false, "{:?} vs {:?}", got, want),
        }
    }

    #[test]
    fn union_of_chains_is_a_chain(pts in arb_enumeration(), q in 0i64..36, n in 1usize..4) {
        let prefix: Vec<Rational> = pts.iter().map(|x| x.0.clone()).collect();
        let q = rat(q, 32);
        let w = pow2(-(n as i64));
        let ok = |idx: &[usize]| {
            let mut v: Vec<Rational> = idx.iter().map(|&i| prefix[i].clone()).collect();
            v.sort();
            v.first() == Some(&int(0)) && v.windows(2).all(|p| p[1] > p[0] && &p[1] - &p[0] < w)
                && v.last().is_some_and(|l| &q >= l && &q - l < w)
        };
        let len = prefix.len().min(8);
        let chains: Vec<Vec<usize>> = (0u32..(1 << len))
            .map(|m| (0..len).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|c| ok(c))
            .collect();
        for a in &chains {
            for b in &chains {
                let mut u: Vec<usize> = a.iter().chain(b).cloned().collect();
                u.sort();
                u.dedup();
                prop_assert!(ok(&u));
            }
        }
    }

    #[test]
    fn sweep_matches_definitions(pts in arb_enumeration(), q in 0i64..33, n in 1usize..4) {
        let prefix: Vec<Rational> = pts.iter().map(|x| x.0.clone()).collect();
        let g: Vec<Rational> = pts.iter().map(|x| x.1.clone()).collect();
        let gt: Vec<Rational> = (0..prefix.len()).map(|k| naive_gtilde(&prefix, &g, k)).collect();
        let p = Pipeline::new(&table(&pts)).unwrap();
        let items = p.items(prefix.len(), &mut fuel()).unwrap();
        for (it, want) in items.iter().zip(&gt) {
            prop_assert_eq!(&it.gt, want);
        }
        let q = rat(q, 32);
        let d = p.config.d.clone();
        match p.stage(&q, n, &mut fuel()) {
            Ok(s) => {
                prop_assert_eq!(Some(s.f), naive_f(&prefix, &gt, &d, &q, n));
                prop_assert_eq!(Some(s.ftilde), naive_ftilde(&prefix, &gt, &d, &q, n));
            }
            Err(_) => prop_assert!(naive_f(&prefix, &gt, &d, &q, n).is_none()),
        }
    }

    #[test]
    fn claims_on_random_tuples(pi in 0i64..59, qi in 1i64..60, m in 1usize..6, dn in 1usize..4) {
        prop_assume!(pi < qi);
        let (w, alpha, beta) = interp_instance();
        let p = Pipeline::new(&w).unwrap();
        let mut chk = ClaimChecker::new(&p, &alpha, &beta, 24);
        chk.check(&rat(pi, 80), &rat(qi, 80), m, m + dn, &mut fuel()).unwrap();
        prop_assert!(chk.violations_besides_ties_of(17).is_empty(), "{:?}", chk.violations);
    }
}
