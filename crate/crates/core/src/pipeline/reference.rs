//! Direct transcriptions of the chain search and the two stage functions over
//! a finite enumeration prefix. Slow; used to cross-check the sweep.

use crate::kernel::{pow2, Rational};

/// Does the sorted value list form a chain from `0` to within `2^-n` of `q`?
fn is_chain(values: &[Rational], q: &Rational, n: usize) -> bool {
    let w = pow2(-(n as i64));
    let Some(last) = values.last() else { return false };
    values.first().is_some_and(|v| v == &Rational::from_integer(0.into()))
        && values.windows(2).all(|p| p[1] > p[0] && &p[1] - &p[0] < w)
        && q >= last
        && q - last < w
}

fn sorted_by_value(prefix: &[Rational], mut idx: Vec<usize>) -> Vec<usize> {
    idx.sort_by(|a, b| prefix[*a].cmp(&prefix[*b]));
    idx
}

/// Inclusion-greatest chain over all subsets of the first `t + 1` entries, for
/// the first `t` where one exists. Exponential; prefixes up to about 16.
pub fn brute_force_p(prefix: &[Rational], q: &Rational, n: usize) -> Option<(usize, Vec<usize>)> {
    for t in 0..prefix.len() {
        let mut union: Vec<bool> = vec![false; t + 1];
        let mut found = false;
        for mask in 0u32..(1u32 << (t + 1)) {
            let idx: Vec<usize> = (0..=t).filter(|i| mask >> i & 1 == 1).collect();
            let idx = sorted_by_value(prefix, idx);
            let values: Vec<Rational> = idx.iter().map(|&i| prefix[i].clone()).collect();
            if is_chain(&values, q, n) {
                found = true;
                for i in idx {
                    union[i] = true;
                }
            }
        }
        if found {
            let idx = (0..=t).filter(|&i| union[i]).collect();
            return Some((t, sorted_by_value(prefix, idx)));
        }
    }
    None
}

/// The same search, using that the greatest chain is the run of sorted points
/// starting at `0` with gaps below `2^-n`.
pub fn search_p_in_prefix(prefix: &[Rational], q: &Rational, n: usize) -> Option<(usize, Vec<usize>)> {
    let w = pow2(-(n as i64));
    for t in 0..prefix.len() {
        let idx = sorted_by_value(prefix, (0..=t).filter(|&i| &prefix[i] <= q).collect());
        let mut run: Vec<usize> = Vec::new();
        for i in idx {
            match run.last() {
                None if prefix[i] == Rational::from_integer(0.into()) => run.push(i),
                Some(&j) if &prefix[i] - &prefix[j] < w => run.push(i),
                _ => break,
            }
        }
        if run.last().is_some_and(|&j| q - &prefix[j] < w) {
            return Some((t, run));
        }
    }
    None
}

/// `f(q,n) = min { gt(p) + d (q - p) : p in P(q,n) }`
pub fn naive_f(prefix: &[Rational], gt: &[Rational], d: &Rational, q: &Rational, n: usize) -> Option<Rational> {
    let (_, chain) = search_p_in_prefix(prefix, q, n)?;
    chain.iter().map(|&i| &gt[i] + d * (q - &prefix[i])).min()
}

/// `ft(q,n) = max ({ f(p,n) : p in P(q,n) } + { f(q,n) })`
pub fn naive_ftilde(prefix: &[Rational], gt: &[Rational], d: &Rational, q: &Rational, n: usize) -> Option<Rational> {
    let (_, chain) = search_p_in_prefix(prefix, q, n)?;
    let mut best = naive_f(prefix, gt, d, q, n)?;
    for i in chain {
        let v = naive_f(prefix, gt, d, &prefix[i], n)?;
        if v > best {
            best = v;
        }
    }
    Some(best)
}

/// `gt(q_k) = max { g(q_m) : m <= k, q_m <= q_k }`
pub fn naive_gtilde(prefix: &[Rational], g: &[Rational], k: usize) -> Rational {
    (0..=k).filter(|&m| prefix[m] <= prefix[k]).map(|m| g[m].clone()).max().expect("k itself qualifies")
}
