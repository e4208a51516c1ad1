//! Dynamic programming over a nice tree decomposition.
//!
//! A state at node `a` fixes, for every bag vertex `u`:
//! `D(u)` (its distance to t in the solution graph, or infinity), a bit
//! `d(u)` (the arc realizing `D(u)` has already been placed), membership in
//! `R` (vertices the agent may visit), and for `u` in `R` a follow pair
//! `(F0, F1)` (weight of the arc the agent takes plus the distance from its
//! head, and that distance alone) with a bit `f(u)` (the chosen arc has
//! already been placed). The value is the fewest edits among the arcs
//! introduced below `a` that realize the profile. The solution certifies that
//! every tie resolution of the agent walks through all critical arcs.
//!
//! Several instances that differ only in which arcs are addable and which are
//! critical can be solved in one pass; values are then vectors over them.

use std::collections::BTreeSet;
use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lset::{compute_lsets, LSets, DEFAULT_LSET_CAP};
use crate::model::{ArcId, ArcKind, EditPlan, Instance, VertexId};
use crate::oracle::Solution;
use crate::rational::Rational;
use crate::treedecomp::{decompose, NiceTreeDecomposition, NodeKind};

/// Per arc of G+A: whether traversing it makes the tail of some other
/// critical arc unreachable while it was reachable before.
pub fn t_avoiding_table(inst: &Instance) -> Vec<bool> {
    let reach = inst.reachability();
    inst.arcs
        .iter()
        .map(|e| {
            inst.critical.iter().any(|&c| {
                let x = inst.arcs[c].tail;
                c != e.id && reach[e.tail][x] && !reach[e.head][x]
            })
        })
        .collect()
}

/// Critical arcs with a non-critical parallel twin. Such a twin is exempt
/// from T-avoidance when only endpoints are compared, although taking it
/// skips the critical arc.
pub fn parallel_critical_twins(inst: &Instance) -> Vec<(ArcId, ArcId)> {
    let mut out = Vec::new();
    for &c in &inst.critical {
        let (x, y) = (inst.arcs[c].tail, inst.arcs[c].head);
        for a in &inst.arcs {
            if a.id != c && !inst.critical.contains(&a.id) && a.tail == x && a.head == y {
                out.push((c, a.id));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct TwOptions {
    pub lset_cap: usize,
    pub deadline: Option<Instant>,
    /// Abort with [`Error::TooLarge`] beyond this many memoized states.
    pub max_states: Option<usize>,
}

impl Default for TwOptions {
    fn default() -> Self {
        TwOptions { lset_cap: DEFAULT_LSET_CAP, deadline: None, max_states: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TwStats {
    pub width: usize,
    pub nodes: usize,
    pub lset_size: usize,
    /// Distinct memoized states.
    pub states: usize,
    /// Largest number of memoized states at a single node.
    pub max_node_states: usize,
    pub wall_ms: u128,
}

/// Root profile of an optimal solution: distance from s, and for the arc the
/// agent takes at s its weight plus the head's distance, and that distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RootProfile {
    pub dist: Rational,
    pub follow_total: Rational,
    pub follow_rest: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwSolution {
    pub cost: usize,
    pub plan: EditPlan,
    pub root: RootProfile,
}

impl From<TwSolution> for Solution {
    fn from(s: TwSolution) -> Self {
        Solution { cost: s.cost, plan: s.plan }
    }
}

#[derive(Debug, Clone)]
pub struct TwBatch {
    pub solutions: Vec<Option<TwSolution>>,
    pub stats: TwStats,
}

/// Solves one instance: decomposes it, computes its L-sets and runs the DP.
pub fn dp_solve(inst: &Instance, opts: &TwOptions) -> Result<(Option<TwSolution>, TwStats)> {
    inst.ensure_valid()?;
    let ntd = decompose(inst);
    let lsets = compute_lsets(inst, opts.lset_cap)?;
    let mut batch = dp_solve_variants(inst, std::slice::from_ref(inst), &ntd, &lsets, opts)?;
    Ok((batch.solutions.pop().unwrap(), batch.stats))
}

/// Solves every variant, which must share `base`'s graph (see
/// [`Instance::same_graph`]); `ntd` and `lsets` must belong to that graph.
pub fn dp_solve_variants(
    base: &Instance,
    variants: &[Instance],
    ntd: &NiceTreeDecomposition,
    lsets: &LSets,
    opts: &TwOptions,
) -> Result<TwBatch> {
    if variants.is_empty() {
        return Ok(TwBatch { solutions: vec![], stats: TwStats::default() });
    }
    if variants.iter().any(|v| !v.same_graph(base)) {
        return Err(Error::IncompatibleVariants);
    }
    if lsets.len() >= u16::MAX as usize {
        return Err(Error::LSetExplosion(lsets.len()));
    }
    let start = Instant::now();
    let run = || -> Result<TwBatch> {
        let mut dp = Dp::new(base, variants, ntd, lsets, opts);
        let solutions = dp.solve_root()?;
        let stats = TwStats {
            width: ntd.width,
            nodes: ntd.nodes.len(),
            lset_size: lsets.len(),
            states: dp.memo.iter().map(|m| m.len()).sum(),
            max_node_states: dp.memo.iter().map(|m| m.len()).max().unwrap_or(0),
            wall_ms: start.elapsed().as_millis(),
        };
        Ok(TwBatch { solutions, stats })
    };
    // The recursion follows the decomposition's height.
    if ntd.nodes.len() > 400 {
        std::thread::scope(|scope| {
            std::thread::Builder::new()
                .stack_size(256 << 20)
                .spawn_scoped(scope, run)
                .expect("spawn dp thread")
                .join()
                .expect("dp thread panicked")
        })
    } else {
        run()
    }
}

const INF: u16 = u16::MAX;

// Slot layout of one bag vertex inside a key.
const D_SHIFT: u32 = 0;
const F0_SHIFT: u32 = 16;
const F1_SHIFT: u32 = 32;
const BIT_D: u64 = 1 << 48;
const BIT_R: u64 = 1 << 49;
const BIT_F: u64 = 1 << 50;
const MASK16: u64 = 0xffff;

#[inline]
fn slot(d_idx: u16, f0: u16, f1: u16, flags: u64) -> u64 {
    (d_idx as u64) << D_SHIFT | (f0 as u64) << F0_SHIFT | (f1 as u64) << F1_SHIFT | flags
}

#[inline]
fn d_of(s: u64) -> u16 {
    (s >> D_SHIFT & MASK16) as u16
}

#[inline]
fn f0_of(s: u64) -> u16 {
    (s >> F0_SHIFT & MASK16) as u16
}

#[inline]
fn f1_of(s: u64) -> u16 {
    (s >> F1_SHIFT & MASK16) as u16
}

#[inline]
fn add(a: u16, b: u16) -> u16 {
    if a == INF || b == INF {
        INF
    } else {
        a + b
    }
}

struct Dp<'a> {
    inst: &'a Instance,
    ntd: &'a NiceTreeDecomposition,
    k: usize,
    /// Union L in ticks; index `inf_idx` encodes infinity.
    lvals: Vec<i64>,
    inf_idx: u16,
    zero_idx: u16,
    beta_num: i128,
    beta_den: i128,
    weight: Vec<i64>,
    scale: i64,
    /// Finite distance candidates per vertex.
    dopts: Vec<Vec<u16>>,
    /// Follow pairs per vertex, already filtered by the reward check.
    fopts: Vec<Vec<(u16, u16)>>,
    /// Edit cost of leaving out / keeping each arc, per variant.
    c0: Vec<Vec<u16>>,
    c1: Vec<Vec<u16>>,
    tavoid: Vec<Vec<bool>>,
    memo: Vec<FxHashMap<Box<[u64]>, u32>>,
    vals: Vec<u16>,
    deadline: Option<Instant>,
    max_states: Option<usize>,
    computed: usize,
}

impl<'a> Dp<'a> {
    fn new(
        base: &'a Instance,
        variants: &[Instance],
        ntd: &'a NiceTreeDecomposition,
        lsets: &LSets,
        opts: &TwOptions,
    ) -> Self {
        let sc = &lsets.scaled;
        let lvals = lsets.union.clone();
        let index = |x: i64| lvals.binary_search(&x).expect("value in L") as u16;
        let zero_idx = index(0);
        let dopts: Vec<Vec<u16>> =
            lsets.per_vertex.iter().map(|set| set.iter().map(|&x| index(x)).collect()).collect();
        let out = base.out_arcs();
        let threshold = sc.threshold();
        let fopts = (0..base.n)
            .map(|u| {
                let mut pairs: BTreeSet<(u16, u16)> = BTreeSet::new();
                for &id in &out[u] {
                    let w = sc.weight[id];
                    for &l in &lsets.per_vertex[base.arcs[id].head] {
                        if sc.perceived(w, l) <= threshold {
                            pairs.insert((index(w + l), index(l)));
                        }
                    }
                }
                pairs.into_iter().collect()
            })
            .collect();
        let k = variants.len();
        let m = base.m();
        let mut c0 = vec![vec![0u16; k]; m];
        let mut c1 = vec![vec![0u16; k]; m];
        let mut tavoid = vec![vec![false; k]; m];
        for (v, var) in variants.iter().enumerate() {
            let table = t_avoiding_table(var);
            for a in &var.arcs {
                let (x, y) = match a.kind {
                    ArcKind::Base => (1, 0),
                    ArcKind::Addable => (0, 1),
                };
                c0[a.id][v] = x;
                c1[a.id][v] = y;
                tavoid[a.id][v] = table[a.id];
            }
        }
        Dp {
            inst: base,
            ntd,
            k,
            inf_idx: lvals.len() as u16,
            zero_idx,
            lvals,
            beta_num: sc.beta_num as i128,
            beta_den: sc.beta_den as i128,
            weight: sc.weight.clone(),
            scale: sc.scale,
            dopts,
            fopts,
            c0,
            c1,
            tavoid,
            memo: vec![FxHashMap::default(); ntd.nodes.len()],
            vals: Vec::new(),
            deadline: opts.deadline,
            max_states: opts.max_states,
            computed: 0,
        }
    }

    /// Perceived value `den*first + num*rest` of a follow pair.
    #[inline]
    fn follow_value(&self, f0: u16, f1: u16) -> i128 {
        let (a, b) = (self.lvals[f0 as usize] as i128, self.lvals[f1 as usize] as i128);
        self.beta_den * (a - b) + self.beta_num * b
    }

    /// Keys at the root, one per choice of `D(s)` and follow pair of s.
    fn root_keys(&self) -> Vec<Box<[u64]>> {
        let (s, t) = (self.inst.s, self.inst.t);
        let t_slot = slot(self.zero_idx, self.zero_idx, self.zero_idx, BIT_D | BIT_R | BIT_F);
        let mut keys = Vec::new();
        for &dv in &self.dopts[s] {
            for &(f0, f1) in &self.fopts[s] {
                if !self.follow_fits(dv, f0, f1) {
                    continue;
                }
                let s_slot = slot(dv, f0, f1, BIT_R);
                let key: Box<[u64]> = if s < t { [s_slot, t_slot].into() } else { [t_slot, s_slot].into() };
                keys.push(key);
            }
        }
        keys
    }

    /// Follow pairs compatible with a finite distance: the followed path is
    /// no shorter than `D(u)` and its perceived value is at most `D(u)`.
    #[inline]
    fn follow_fits(&self, dv: u16, f0: u16, f1: u16) -> bool {
        let d = self.lvals[dv as usize];
        self.lvals[f0 as usize] >= d && self.follow_value(f0, f1) <= self.beta_den * d as i128
    }

    fn solve_root(&mut self) -> Result<Vec<Option<TwSolution>>> {
        let root = self.ntd.root;
        let keys = self.root_keys();
        let mut best: Vec<(u16, Option<usize>)> = vec![(INF, None); self.k];
        for (i, key) in keys.iter().enumerate() {
            let off = self.opt(root, key)? as usize;
            for v in 0..self.k {
                let x = self.vals[off + v];
                if x < best[v].0 {
                    best[v] = (x, Some(i));
                }
            }
        }
        let s_pos = if self.inst.s < self.inst.t { 0 } else { 1 };
        let mut out = Vec::with_capacity(self.k);
        for (v, &(cost, which)) in best.iter().enumerate() {
            let Some(i) = which else {
                out.push(None);
                continue;
            };
            let mut present = vec![false; self.inst.m()];
            self.reconstruct(root, &keys[i], v, &mut present)?;
            let plan = EditPlan::new(
                (0..self.inst.m()).filter(|&a| !present[a] && self.c0[a][v] == 1),
                (0..self.inst.m()).filter(|&a| present[a] && self.c1[a][v] == 1),
            );
            debug_assert_eq!(plan.cost(), cost as usize);
            let s_slot = keys[i][s_pos];
            let to_q = |idx: u16| Rational::new(self.lvals[idx as usize], self.scale);
            out.push(Some(TwSolution {
                cost: cost as usize,
                plan,
                root: RootProfile {
                    dist: to_q(d_of(s_slot)),
                    follow_total: to_q(f0_of(s_slot)),
                    follow_rest: to_q(f1_of(s_slot)),
                },
            }));
        }
        Ok(out)
    }

    fn check_limits(&mut self) -> Result<()> {
        self.computed += 1;
        if self.computed % 4096 == 0 && self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(Error::Timeout);
        }
        if self.max_states.is_some_and(|cap| self.computed > cap) {
            return Err(Error::TooLarge(format!("more than {} DP states", self.computed - 1)));
        }
        Ok(())
    }

    /// Offset of the value vector of `key` at `node` in the arena.
    fn opt(&mut self, node: usize, key: &[u64]) -> Result<u32> {
        if let Some(&off) = self.memo[node].get(key) {
            return Ok(off);
        }
        self.check_limits()?;
        let values = self.compute(node, key)?;
        let off = self.vals.len() as u32;
        self.vals.extend_from_slice(&values);
        self.memo[node].insert(key.into(), off);
        Ok(off)
    }

    fn value_at(&mut self, node: usize, key: &[u64], v: usize) -> Result<u16> {
        let off = self.opt(node, key)?;
        Ok(self.vals[off as usize + v])
    }

    fn values(&self, off: u32) -> &[u16] {
        &self.vals[off as usize..off as usize + self.k]
    }

    fn compute(&mut self, node: usize, key: &[u64]) -> Result<Vec<u16>> {
        let nd = &self.ntd.nodes[node];
        let k = self.k;
        match nd.kind {
            NodeKind::Leaf => Ok(vec![if self.leaf_ok(key) { 0 } else { INF }; k]),
            NodeKind::IntroduceVertex(u) => {
                let pos = nd.bag.binary_search(&u).expect("introduced vertex in bag");
                let s = key[pos];
                if (s & BIT_D == 0 && d_of(s) != self.inf_idx) || (s & BIT_R != 0 && s & BIT_F == 0) {
                    return Ok(vec![INF; k]);
                }
                let child_key: Vec<u64> =
                    key.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &x)| x).collect();
                let off = self.opt(nd.children[0], &child_key)?;
                Ok(self.values(off).to_vec())
            }
            NodeKind::Forget(u) => {
                let child = nd.children[0];
                let pos = self.ntd.nodes[child].bag.binary_search(&u).expect("forgotten vertex in child bag");
                let mut child_key: Vec<u64> = Vec::with_capacity(key.len() + 1);
                child_key.extend_from_slice(&key[..pos]);
                child_key.push(0);
                child_key.extend_from_slice(&key[pos..]);
                let mut best = vec![INF; k];
                for s in self.forget_slots(u) {
                    child_key[pos] = s;
                    let off = self.opt(child, &child_key)?;
                    for (b, &x) in best.iter_mut().zip(self.values(off)) {
                        *b = (*b).min(x);
                    }
                }
                Ok(best)
            }
            NodeKind::IntroduceEdge(a) => {
                let child = nd.children[0];
                let off = self.opt(child, key)?;
                let mut best: Vec<u16> =
                    self.values(off).iter().zip(&self.c0[a]).map(|(&x, &c)| add(x, c)).collect();
                let (admissible, child_key) = self.include_edge(&nd.bag, key, a);
                if admissible.iter().any(|&ok| ok) {
                    let off = self.opt(child, &child_key)?;
                    for v in 0..k {
                        if admissible[v] {
                            best[v] = best[v].min(add(self.values(off)[v], self.c1[a][v]));
                        }
                    }
                }
                Ok(best)
            }
            NodeKind::Join => {
                let (c1, c2) = (nd.children[0], nd.children[1]);
                let mut best = vec![INF; k];
                for (k1, k2) in join_splits(key) {
                    let o1 = self.opt(c1, &k1)?;
                    if self.values(o1).iter().all(|&x| x == INF) {
                        continue;
                    }
                    let left = self.values(o1).to_vec();
                    let o2 = self.opt(c2, &k2)?;
                    for v in 0..k {
                        best[v] = best[v].min(add(left[v], self.values(o2)[v]));
                    }
                }
                Ok(best)
            }
        }
    }

    fn leaf_ok(&self, key: &[u64]) -> bool {
        key.iter().all(|&s| {
            (s & BIT_D != 0 || d_of(s) == self.inf_idx) && (s & BIT_R == 0 || s & BIT_F != 0)
        })
    }

    /// Profiles of a vertex at the moment it is forgotten.
    fn forget_slots(&self, u: VertexId) -> Vec<u64> {
        let mut out = Vec::new();
        for &dv in &self.dopts[u] {
            for &(f0, f1) in &self.fopts[u] {
                if self.follow_fits(dv, f0, f1) {
                    out.push(slot(dv, f0, f1, BIT_R));
                }
            }
        }
        for &dv in self.dopts[u].iter().chain([&self.inf_idx]) {
            out.push(slot(dv, 0, 0, 0));
        }
        out
    }

    /// Per-variant admissibility of keeping arc `a`, and the child key with
    /// the realized bits set.
    fn include_edge(&self, bag: &[VertexId], key: &[u64], a: ArcId) -> (Vec<bool>, Vec<u64>) {
        let arc = &self.inst.arcs[a];
        let px = bag.binary_search(&arc.tail).expect("tail in bag");
        let py = bag.binary_search(&arc.head).expect("head in bag");
        let (sx, sy) = (key[px], key[py]);
        let w = self.weight[a];
        let (dx, dy) = (d_of(sx), d_of(sy));
        let inf = self.inf_idx;
        let mut child_key = key.to_vec();
        // D(x) <= w + D(y).
        let dist_ok = dy == inf || (dx != inf && self.lvals[dx as usize] <= w + self.lvals[dy as usize]);
        if !dist_ok {
            return (vec![false; self.k], child_key);
        }
        let mut admissible = vec![true; self.k];
        if sx & BIT_R != 0 {
            let (f0, f1) = (f0_of(sx), f1_of(sx));
            let follow = self.follow_value(f0, f1);
            let (strict_ok, loose_ok) = if dy == inf {
                (true, true)
            } else {
                let here = self.beta_den * w as i128 + self.beta_num * self.lvals[dy as usize] as i128;
                (follow < here, follow <= here)
            };
            let head_in_r = sy & BIT_R != 0;
            for v in 0..self.k {
                let strict = !head_in_r || self.tavoid[a][v];
                admissible[v] = if strict { strict_ok } else { loose_ok };
            }
            if dy != inf
                && self.lvals[f0 as usize] - self.lvals[f1 as usize] == w
                && f1 == dy
            {
                child_key[px] |= BIT_F;
            }
        }
        if dx != inf && dy != inf && self.lvals[dx as usize] == w + self.lvals[dy as usize] {
            child_key[px] |= BIT_D;
        }
        (admissible, child_key)
    }

    /// Walks down from `key` along transitions that attain the value of
    /// variant `v`, marking kept arcs.
    fn reconstruct(&mut self, node: usize, key: &[u64], v: usize, present: &mut [bool]) -> Result<()> {
        let mut node = node;
        let mut key: Vec<u64> = key.to_vec();
        loop {
            let target = self.value_at(node, &key, v)?;
            debug_assert_ne!(target, INF);
            let nd = &self.ntd.nodes[node];
            match nd.kind {
                NodeKind::Leaf => return Ok(()),
                NodeKind::IntroduceVertex(u) => {
                    let pos = nd.bag.binary_search(&u).unwrap();
                    key.remove(pos);
                    node = nd.children[0];
                }
                NodeKind::Forget(u) => {
                    let child = nd.children[0];
                    let pos = self.ntd.nodes[child].bag.binary_search(&u).unwrap();
                    key.insert(pos, 0);
                    let mut found = false;
                    for s in self.forget_slots(u) {
                        key[pos] = s;
                        if self.value_at(child, &key, v)? == target {
                            found = true;
                            break;
                        }
                    }
                    assert!(found, "forget transition lost");
                    node = child;
                }
                NodeKind::IntroduceEdge(a) => {
                    let child = nd.children[0];
                    let bag = nd.bag.clone();
                    let excl = add(self.value_at(child, &key, v)?, self.c0[a][v]);
                    if excl == target {
                        node = child;
                        continue;
                    }
                    let (admissible, child_key) = self.include_edge(&bag, &key, a);
                    assert!(admissible[v], "introduce-edge transition lost");
                    present[a] = true;
                    key = child_key;
                    node = child;
                }
                NodeKind::Join => {
                    let (c1, c2) = (nd.children[0], nd.children[1]);
                    let mut chosen = None;
                    for (k1, k2) in join_splits(&key) {
                        let x = self.value_at(c1, &k1, v)?;
                        if x == INF {
                            continue;
                        }
                        let y = self.value_at(c2, &k2, v)?;
                        if add(x, y) == target {
                            chosen = Some((k1, k2));
                            break;
                        }
                    }
                    let (k1, k2) = chosen.expect("join transition lost");
                    self.reconstruct(c2, &k2, v, present)?;
                    key = k1;
                    node = c1;
                }
            }
        }
    }
}

/// All ways to split the `d` and `f` bits of a key between two children so
/// that their pointwise products give back the key's bits.
fn join_splits(key: &[u64]) -> Vec<(Vec<u64>, Vec<u64>)> {
    let mut zero_bits: Vec<(usize, u64)> = Vec::new();
    for (i, &s) in key.iter().enumerate() {
        if s & BIT_D == 0 {
            zero_bits.push((i, BIT_D));
        }
        if s & BIT_R != 0 && s & BIT_F == 0 {
            zero_bits.push((i, BIT_F));
        }
    }
    let total = 3usize.pow(zero_bits.len() as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut k1 = key.to_vec();
        let mut k2 = key.to_vec();
        for &(i, bit) in &zero_bits {
            match code % 3 {
                0 => {}
                1 => k1[i] |= bit,
                _ => k2[i] |= bit,
            }
            code /= 3;
        }
        out.push((k1, k2));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{chain, fixture_fig1, gen_random, RandomParams};
    use crate::oracle::{solve_exact, verify_plan, ExactOptions, Semantics};
    use crate::model::Arc;
    use proptest::prelude::*;

    #[test]
    fn fig1_avoiding_arcs() {
        let inst = fixture_fig1();
        let table = t_avoiding_table(&inst);
        assert!(table[5], "(b,f) avoids (b,e)");
        assert!(!table[4], "the critical arc itself");
        assert!(!table[8], "(e,t)");
        assert!(table[2], "(s,c) cannot reach b");
        assert!(!table[0] && !table[1] && !table[10]);
        assert!(parallel_critical_twins(&inst).is_empty());
    }

    #[test]
    fn parallel_twin_is_flagged_and_avoiding() {
        let mut inst = fixture_fig1();
        inst.arcs.push(Arc { id: 11, rank: 11, ..inst.arcs[4].clone() });
        assert_eq!(parallel_critical_twins(&inst), vec![(4, 11)]);
        assert!(t_avoiding_table(&inst)[11]);
    }

    #[test]
    fn fig1_cost_two() {
        let inst = fixture_fig1();
        let (sol, stats) = dp_solve(&inst, &TwOptions::default()).unwrap();
        let sol = sol.unwrap();
        assert_eq!(sol.cost, 2);
        assert!(verify_plan(&inst, &sol.plan, Semantics::Robust).unwrap().feasible);
        assert!(stats.states > 0);
        assert_eq!(sol.root.dist, Rational::from_integer(26));
        assert_eq!(sol.root.follow_total, Rational::from_integer(26));
        assert_eq!(sol.root.follow_rest, Rational::from_integer(16));
    }

    #[test]
    fn empty_critical_set() {
        let mut inst = fixture_fig1();
        inst.critical.clear();
        assert_eq!(dp_solve(&inst, &TwOptions::default()).unwrap().0.unwrap().cost, 0);
        let c = chain(3, 2);
        assert_eq!(dp_solve(&c, &TwOptions::default()).unwrap().0.unwrap().cost, 0);
    }

    #[test]
    fn state_cap() {
        let inst = fixture_fig1();
        let opts = TwOptions { max_states: Some(10), ..TwOptions::default() };
        assert!(matches!(dp_solve(&inst, &opts), Err(Error::TooLarge(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_robust_oracle(seed in 0u64..100_000) {
            let p = RandomParams { seed, n: 5 + (seed % 3) as usize, target_arcs: 9, weight_range: (0, 4), ..RandomParams::default() };
            let inst = gen_random(&p).unwrap();
            let exact = solve_exact(&inst, Semantics::Robust, &ExactOptions::default()).unwrap();
            let (dp, _) = dp_solve(&inst, &TwOptions::default()).unwrap();
            prop_assert_eq!(exact.as_ref().map(|s| s.cost), dp.as_ref().map(|s| s.cost));
            if let Some(d) = dp {
                prop_assert!(verify_plan(&inst, &d.plan, Semantics::Robust).unwrap().feasible);
            }
        }
    }
}
