//! Per-vertex sets of all v-t path costs in G+A.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, Scaled};
use crate::rational::Rational;

pub const DEFAULT_LSET_CAP: usize = 20_000;

/// Path-cost sets in integer ticks (see [`Scaled`]).
#[derive(Debug, Clone)]
pub struct LSets {
    pub scaled: Scaled,
    /// Sorted, deduplicated costs of every v-t path; empty when t is unreachable.
    pub per_vertex: Vec<Vec<i64>>,
    /// Sorted union over all vertices.
    pub union: Vec<i64>,
}

impl LSets {
    pub fn len(&self) -> usize {
        self.union.len()
    }

    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }

    pub fn vertex_rationals(&self, v: usize) -> Vec<Rational> {
        self.per_vertex[v].iter().map(|&x| self.scaled.to_rational(x)).collect()
    }

    pub fn union_rationals(&self) -> Vec<Rational> {
        self.union.iter().map(|&x| self.scaled.to_rational(x)).collect()
    }
}

/// Computes L(v) bottom-up in reverse topological order of G+A.
pub fn compute_lsets(inst: &Instance, cap: usize) -> Result<LSets> {
    let scaled = Scaled::new(inst);
    let order = inst.topological_order().expect("acyclic instance");
    let out = inst.out_arcs();
    let mut per_vertex: Vec<Vec<i64>> = vec![Vec::new(); inst.n];
    per_vertex[inst.t] = vec![0];
    for &u in order.iter().rev() {
        if u == inst.t {
            continue;
        }
        let mut set = Vec::new();
        for &id in &out[u] {
            let w = scaled.weight[id];
            set.extend(per_vertex[inst.arcs[id].head].iter().map(|&l| w + l));
        }
        set.sort_unstable();
        set.dedup();
        if set.len() > cap {
            return Err(Error::LSetExplosion(cap));
        }
        per_vertex[u] = set;
    }
    let mut union: Vec<i64> = per_vertex.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.len() > cap {
        return Err(Error::LSetExplosion(cap));
    }
    Ok(LSets { scaled, per_vertex, union })
}

/// Combinatorial bounds on |L| for an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub l_size: usize,
    /// Arc count of the longest path in G+A.
    pub p: usize,
    pub m: usize,
    pub integer_weights: bool,
    /// Number of distinct arc weights (integer instances only).
    pub distinct_weights: Option<usize>,
    pub max_weight: Option<i64>,
    /// `(p+1)^|W|`, saturating.
    pub multiset_bound: Option<u128>,
    /// `1 + p * maxW`.
    pub linear_bound: Option<u128>,
    /// Number of arc sets of size at most `p`, which bounds the path count.
    pub path_count_bound: u128,
    pub multiset_holds: Option<bool>,
    pub linear_holds: Option<bool>,
    pub path_count_holds: bool,
}

impl BoundReport {
    /// False iff some applicable bound is violated.
    pub fn all_hold(&self) -> bool {
        self.multiset_holds != Some(false) && self.linear_holds != Some(false) && self.path_count_holds
    }
}

pub fn longest_path_arcs(inst: &Instance) -> usize {
    let order = inst.topological_order().expect("acyclic instance");
    let out = inst.out_arcs();
    let mut len = vec![0usize; inst.n];
    for &u in order.iter().rev() {
        for &id in &out[u] {
            len[u] = len[u].max(1 + len[inst.arcs[id].head]);
        }
    }
    len.into_iter().max().unwrap_or(0)
}

pub fn check_bounds(inst: &Instance, lsets: &LSets) -> BoundReport {
    let p = longest_path_arcs(inst);
    let m = inst.m();
    let l_size = lsets.len();
    let integer_weights = inst.arcs.iter().all(|a| a.weight.is_integer());
    let (distinct_weights, max_weight, multiset_bound, linear_bound) = if integer_weights {
        let mut w: Vec<i64> = inst.arcs.iter().map(|a| a.weight.numer()).collect();
        w.sort_unstable();
        w.dedup();
        let max_w = w.last().copied().unwrap_or(0);
        let multiset = (p as u128 + 1).saturating_pow(w.len() as u32);
        let linear = 1 + p as u128 * max_w as u128;
        (Some(w.len()), Some(max_w), Some(multiset), Some(linear))
    } else {
        (None, None, None, None)
    };
    let mut path_count_bound: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=p.min(m) {
        path_count_bound = path_count_bound.saturating_add(binom);
        binom = binom.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    let size = l_size as u128;
    BoundReport {
        l_size,
        p,
        m,
        integer_weights,
        distinct_weights,
        max_weight,
        multiset_bound,
        linear_bound,
        path_count_bound,
        multiset_holds: multiset_bound.map(|b| size <= b),
        linear_holds: linear_bound.map(|b| size <= b),
        path_count_holds: size <= path_count_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{chain, fixture_fig1, gen_random, RandomParams};
    use crate::model::VertexId;
    use proptest::prelude::*;

    /// All v-t path costs by explicit DFS over paths.
    fn brute_force(inst: &Instance) -> Vec<Vec<Rational>> {
        fn walk(inst: &Instance, v: VertexId, acc: Rational, out: &mut Vec<Rational>) {
            if v == inst.t {
                out.push(acc);
                return;
            }
            for a in inst.arcs.iter().filter(|a| a.tail == v) {
                walk(inst, a.head, acc + a.weight, out);
            }
        }
        (0..inst.n)
            .map(|v| {
                let mut out = Vec::new();
                walk(inst, v, Rational::ZERO, &mut out);
                out.sort();
                out.dedup();
                out
            })
            .collect()
    }

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn fig1_sets() {
        let inst = fixture_fig1();
        let l = compute_lsets(&inst, DEFAULT_LSET_CAP).unwrap();
        assert_eq!(l.vertex_rationals(2), ints(&[12, 20]));
        assert_eq!(l.vertex_rationals(1), ints(&[13, 16, 21]));
        assert_eq!(l.vertex_rationals(7), ints(&[0]));
        let report = check_bounds(&inst, &l);
        assert_eq!((report.p, report.distinct_weights, report.max_weight), (4, Some(4), Some(10)));
        assert_eq!(report.multiset_bound, Some(625));
        assert_eq!(report.linear_bound, Some(41));
        assert!(report.all_hold());
    }

    #[test]
    fn single_arc_and_chain() {
        let one = chain(1, 5);
        let l = compute_lsets(&one, 10).unwrap();
        assert_eq!(l.union_rationals(), ints(&[0, 5]));
        for p in 1..8 {
            let c = chain(p, 1);
            let l = compute_lsets(&c, 100).unwrap();
            assert_eq!(l.len(), p + 1);
            assert_eq!(check_bounds(&c, &l).linear_bound, Some(p as u128 + 1));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let inst = fixture_fig1();
        assert_eq!(compute_lsets(&inst, 3).unwrap_err(), Error::LSetExplosion(3));
    }

    #[test]
    fn rational_weights_skip_integer_bounds() {
        let mut inst = chain(2, 1);
        inst.arcs[0].weight = Rational::new(1, 3);
        let l = compute_lsets(&inst, 10).unwrap();
        assert_eq!(l.union_rationals(), vec![0.into(), 1.into(), Rational::new(4, 3)]);
        let r = check_bounds(&inst, &l);
        assert_eq!(r.linear_holds, None);
        assert!(r.all_hold());
    }

    proptest! {
        #[test]
        fn matches_brute_force(seed in 0u64..400) {
            let inst = gen_random(&RandomParams { seed, n: 4 + (seed % 7) as usize, ..RandomParams::default() }).unwrap();
            let l = compute_lsets(&inst, DEFAULT_LSET_CAP).unwrap();
            let brute = brute_force(&inst);
            for v in 0..inst.n {
                prop_assert_eq!(l.vertex_rationals(v), brute[v].clone());
            }
            prop_assert!(l.union.contains(&0));
            let report = check_bounds(&inst, &l);
            prop_assert!(report.all_hold(), "{:?}", report);
        }
    }
}
