//! Instance data model: arcs, instances, edit plans and graph views.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type VertexId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcKind {
    /// Present in `G`; removing it costs one edit.
    Base,
    /// Member of the auxiliary pool `A`; adding it costs one edit.
    Addable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub id: ArcId,
    pub tail: VertexId,
    pub head: VertexId,
    pub weight: Rational,
    pub kind: ArcKind,
    /// Position in the agent's tie-break order; smaller wins.
    pub rank: usize,
}

impl Arc {
    pub fn is_base(&self) -> bool {
        self.kind == ArcKind::Base
    }
}

/// A planning model together with the addable pool and the critical arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    pub arcs: Vec<Arc>,
    pub s: VertexId,
    pub t: VertexId,
    pub beta: Rational,
    pub r: Rational,
    pub critical: BTreeSet<ArcId>,
}

/// A broken instance invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ArcIdNotDense { index: usize, id: ArcId },
    DanglingVertex { arc: ArcId, vertex: VertexId },
    EndpointOutOfRange { which: &'static str, vertex: VertexId },
    SourceIsTarget,
    SelfLoop { arc: ArcId },
    NegativeWeight { arc: ArcId },
    NegativeReward,
    BetaOutOfRange,
    RankNotPermutation,
    Cycle { vertices: Vec<VertexId> },
    CriticalUnknown { arc: ArcId },
    CriticalNotBase { arc: ArcId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ArcIdNotDense { index, id } => {
                write!(f, "arc at position {index} has id {id}")
            }
            Violation::DanglingVertex { arc, vertex } => {
                write!(f, "arc {arc} touches nonexistent vertex {vertex}")
            }
            Violation::EndpointOutOfRange { which, vertex } => {
                write!(f, "{which} vertex {vertex} out of range")
            }
            Violation::SourceIsTarget => write!(f, "s equals t"),
            Violation::SelfLoop { arc } => write!(f, "arc {arc} is a self-loop"),
            Violation::NegativeWeight { arc } => write!(f, "arc {arc} has negative weight"),
            Violation::NegativeReward => write!(f, "reward is negative"),
            Violation::BetaOutOfRange => write!(f, "beta outside (0, 1]"),
            Violation::RankNotPermutation => write!(f, "arc ranks are not a permutation of 0..m"),
            Violation::Cycle { vertices } => write!(f, "G+A has a cycle through {vertices:?}"),
            Violation::CriticalUnknown { arc } => write!(f, "critical arc {arc} does not exist"),
            Violation::CriticalNotBase { arc } => write!(f, "critical arc {arc} is addable"),
        }
    }
}

impl Instance {
    pub fn m(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, id: ArcId) -> Result<&Arc> {
        self.arcs.get(id).ok_or(Error::UnknownArcId(id))
    }

    pub fn base_arcs(&self) -> impl Iterator<Item = &Arc> {
        self.arcs.iter().filter(|a| a.kind == ArcKind::Base)
    }

    pub fn addable_arcs(&self) -> impl Iterator<Item = &Arc> {
        self.arcs.iter().filter(|a| a.kind == ArcKind::Addable)
    }

    pub fn beta_r(&self) -> Rational {
        self.beta * self.r
    }

    /// Every broken invariant; empty when the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.s >= self.n {
            out.push(Violation::EndpointOutOfRange { which: "source", vertex: self.s });
        }
        if self.t >= self.n {
            out.push(Violation::EndpointOutOfRange { which: "target", vertex: self.t });
        }
        if self.s == self.t {
            out.push(Violation::SourceIsTarget);
        }
        if !(self.beta > Rational::ZERO && self.beta <= Rational::ONE) {
            out.push(Violation::BetaOutOfRange);
        }
        if self.r.is_negative() {
            out.push(Violation::NegativeReward);
        }
        let mut ranks = vec![false; self.m()];
        let mut ranks_ok = true;
        let mut endpoints_ok = true;
        for (i, a) in self.arcs.iter().enumerate() {
            if a.id != i {
                out.push(Violation::ArcIdNotDense { index: i, id: a.id });
            }
            for v in [a.tail, a.head] {
                if v >= self.n {
                    out.push(Violation::DanglingVertex { arc: a.id, vertex: v });
                    endpoints_ok = false;
                }
            }
            if a.tail == a.head {
                out.push(Violation::SelfLoop { arc: a.id });
            }
            if a.weight.is_negative() {
                out.push(Violation::NegativeWeight { arc: a.id });
            }
            match ranks.get_mut(a.rank) {
                Some(seen) if !*seen => *seen = true,
                _ => ranks_ok = false,
            }
        }
        if !ranks_ok {
            out.push(Violation::RankNotPermutation);
        }
        if endpoints_ok {
            if let Some(cycle) = self.find_cycle() {
                out.push(Violation::Cycle { vertices: cycle });
            }
        }
        for &c in &self.critical {
            match self.arcs.get(c) {
                None => out.push(Violation::CriticalUnknown { arc: c }),
                Some(a) if a.kind != ArcKind::Base => {
                    out.push(Violation::CriticalNotBase { arc: c })
                }
                _ => {}
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    /// Out-arc lists of G+A, each sorted by rank.
    pub fn out_arcs(&self) -> Vec<Vec<ArcId>> {
        let mut out = vec![Vec::new(); self.n];
        for a in &self.arcs {
            out[a.tail].push(a.id);
        }
        for list in &mut out {
            list.sort_by_key(|&id| self.arcs[id].rank);
        }
        out
    }

    pub fn in_arcs(&self) -> Vec<Vec<ArcId>> {
        let mut inc = vec![Vec::new(); self.n];
        for a in &self.arcs {
            inc[a.head].push(a.id);
        }
        inc
    }

    /// Topological order of G+A, or `None` if it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<VertexId>> {
        let mut indeg = vec![0usize; self.n];
        for a in &self.arcs {
            indeg[a.head] += 1;
        }
        let out = self.out_arcs();
        let mut queue: VecDeque<VertexId> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &id in &out[v] {
                let h = self.arcs[id].head;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    queue.push_back(h);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    fn find_cycle(&self) -> Option<Vec<VertexId>> {
        if self.topological_order().is_some() {
            return None;
        }
        // Peel sources and sinks; what is left lies on or between cycles.
        let out = self.out_arcs();
        let mut color = vec![0u8; self.n];
        let mut stack_path = Vec::new();
        fn dfs(
            v: VertexId,
            inst: &Instance,
            out: &[Vec<ArcId>],
            color: &mut [u8],
            path: &mut Vec<VertexId>,
        ) -> Option<Vec<VertexId>> {
            color[v] = 1;
            path.push(v);
            for &id in &out[v] {
                let h = inst.arcs[id].head;
                if color[h] == 1 {
                    let start = path.iter().position(|&x| x == h).unwrap();
                    return Some(path[start..].to_vec());
                }
                if color[h] == 0 {
                    if let Some(c) = dfs(h, inst, out, color, path) {
                        return Some(c);
                    }
                }
            }
            path.pop();
            color[v] = 2;
            None
        }
        (0..self.n).find_map(|v| {
            if color[v] == 0 {
                dfs(v, self, &out, &mut color, &mut stack_path)
            } else {
                None
            }
        })
    }

    /// `reach[x][y]`: y reachable from x in G+A (reflexive).
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let out = self.out_arcs();
        let order = self.topological_order().expect("acyclic instance");
        let mut reach = vec![vec![false; self.n]; self.n];
        for &v in order.iter().rev() {
            reach[v][v] = true;
            for &id in &out[v] {
                let h = self.arcs[id].head;
                for y in 0..self.n {
                    if reach[h][y] {
                        reach[v][y] = true;
                    }
                }
            }
        }
        reach
    }

    /// Restricts to the s-t core of G+A.
    pub fn normalize(&self) -> Result<Normalized> {
        self.ensure_valid()?;
        let out = self.out_arcs();
        let inc = self.in_arcs();
        let walk = |start: VertexId, adj: &[Vec<ArcId>], forward: bool| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &id in &adj[v] {
                    let a = &self.arcs[id];
                    let w = if forward { a.head } else { a.tail };
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen
        };
        let from_s = walk(self.s, &out, true);
        let to_t = walk(self.t, &inc, false);
        let keep: Vec<bool> = (0..self.n).map(|v| from_s[v] && to_t[v]).collect();

        let mut vertex_map = Vec::new();
        let mut new_vertex = vec![usize::MAX; self.n];
        for v in 0..self.n {
            if keep[v] {
                new_vertex[v] = vertex_map.len();
                vertex_map.push(v);
            }
        }
        let mut kept: Vec<&Arc> = self
            .arcs
            .iter()
            .filter(|a| keep[a.tail] && keep[a.head])
            .collect();
        for &c in &self.critical {
            if !kept.iter().any(|a| a.id == c) {
                return Err(Error::CriticalArcUnreachable(c));
            }
        }
        let arc_map: Vec<ArcId> = kept.iter().map(|a| a.id).collect();
        let mut new_arc = vec![usize::MAX; self.m()];
        for (i, &old) in arc_map.iter().enumerate() {
            new_arc[old] = i;
        }
        // Re-densify ranks while keeping their relative order.
        let mut by_rank: Vec<usize> = (0..kept.len()).collect();
        by_rank.sort_by_key(|&i| kept[i].rank);
        let mut rank = vec![0; kept.len()];
        for (r, &i) in by_rank.iter().enumerate() {
            rank[i] = r;
        }
        let arcs = kept
            .drain(..)
            .enumerate()
            .map(|(i, a)| Arc {
                id: i,
                tail: new_vertex[a.tail],
                head: new_vertex[a.head],
                weight: a.weight,
                kind: a.kind,
                rank: rank[i],
            })
            .collect();
        let instance = Instance {
            n: vertex_map.len(),
            arcs,
            s: new_vertex[self.s],
            t: new_vertex[self.t],
            beta: self.beta,
            r: self.r,
            critical: self.critical.iter().map(|&c| new_arc[c]).collect(),
        };
        Ok(Normalized { instance, vertex_map, arc_map })
    }

    /// The graph obtained by applying `plan` to the base graph.
    pub fn apply(&self, plan: &EditPlan) -> Result<GraphView<'_>> {
        for &d in &plan.deletions {
            if self.arc(d)?.kind != ArcKind::Base {
                return Err(Error::WrongArcKind { arc: d, action: "deleted", expected: "base" });
            }
        }
        for &a in &plan.additions {
            if self.arc(a)?.kind != ArcKind::Addable {
                return Err(Error::WrongArcKind { arc: a, action: "added", expected: "addable" });
            }
        }
        let present = self
            .arcs
            .iter()
            .map(|a| match a.kind {
                ArcKind::Base => !plan.deletions.contains(&a.id),
                ArcKind::Addable => plan.additions.contains(&a.id),
            })
            .collect();
        Ok(GraphView { instance: self, present })
    }

    pub fn base_view(&self) -> GraphView<'_> {
        GraphView {
            instance: self,
            present: self.arcs.iter().map(Arc::is_base).collect(),
        }
    }

    /// View with every arc of G+A present.
    pub fn full_view(&self) -> GraphView<'_> {
        GraphView { instance: self, present: vec![true; self.m()] }
    }

    /// True when `other` has the same graph, weights, ranks, endpoints,
    /// bias, reward and critical set, so only arc kinds may differ.
    pub fn same_structure(&self, other: &Instance) -> bool {
        self.critical == other.critical && self.same_graph(other)
    }

    /// Like [`Instance::same_structure`] but the critical sets may differ too.
    pub fn same_graph(&self, other: &Instance) -> bool {
        self.n == other.n
            && self.s == other.s
            && self.t == other.t
            && self.beta == other.beta
            && self.r == other.r
            && self.m() == other.m()
            && self.arcs.iter().zip(&other.arcs).all(|(a, b)| {
                a.tail == b.tail && a.head == b.head && a.weight == b.weight && a.rank == b.rank
            })
    }
}

/// A normalized instance plus the maps back to the original ids.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub instance: Instance,
    /// New vertex id -> original vertex id.
    pub vertex_map: Vec<VertexId>,
    /// New arc id -> original arc id.
    pub arc_map: Vec<ArcId>,
}

impl Normalized {
    pub fn lift_plan(&self, plan: &EditPlan) -> EditPlan {
        EditPlan {
            deletions: plan.deletions.iter().map(|&a| self.arc_map[a]).collect(),
            additions: plan.additions.iter().map(|&a| self.arc_map[a]).collect(),
        }
    }

    pub fn lift_path(&self, path: &[ArcId]) -> Vec<ArcId> {
        path.iter().map(|&a| self.arc_map[a]).collect()
    }
}

/// Deletions from the base graph and additions from the addable pool.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EditPlan {
    pub deletions: BTreeSet<ArcId>,
    pub additions: BTreeSet<ArcId>,
}

impl EditPlan {
    pub fn new(
        deletions: impl IntoIterator<Item = ArcId>,
        additions: impl IntoIterator<Item = ArcId>,
    ) -> Self {
        EditPlan {
            deletions: deletions.into_iter().collect(),
            additions: additions.into_iter().collect(),
        }
    }

    pub fn cost(&self) -> usize {
        self.deletions.len() + self.additions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost() == 0
    }

    /// Edits whose supports are disjoint commute; this merges two of them.
    pub fn union(&self, other: &EditPlan) -> EditPlan {
        EditPlan {
            deletions: self.deletions.union(&other.deletions).copied().collect(),
            additions: self.additions.union(&other.additions).copied().collect(),
        }
    }
}

/// Read-only arc subset of G+A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphView<'a> {
    pub instance: &'a Instance,
    pub present: Vec<bool>,
}

impl<'a> GraphView<'a> {
    pub fn from_mask(instance: &'a Instance, present: Vec<bool>) -> Self {
        assert_eq!(present.len(), instance.m());
        GraphView { instance, present }
    }

    pub fn contains(&self, id: ArcId) -> bool {
        self.present.get(id).copied().unwrap_or(false)
    }

    pub fn arcs(&self) -> impl Iterator<Item = &'a Arc> + '_ {
        self.instance.arcs.iter().filter(|a| self.present[a.id])
    }

    pub fn arc_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.arcs().filter(|a| a.tail == v).count()
    }
}

/// The perceived cost `first_step + beta * remainder`, kept unevaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerceivedCost {
    #[serde(with = "crate::rational::fraction")]
    pub first_step: Rational,
    #[serde(with = "crate::rational::fraction")]
    pub remainder: Rational,
}

impl PerceivedCost {
    pub fn new(first_step: impl Into<Rational>, remainder: impl Into<Rational>) -> Self {
        PerceivedCost { first_step: first_step.into(), remainder: remainder.into() }
    }

    pub fn value(&self, beta: Rational) -> Rational {
        self.first_step + beta * self.remainder
    }

    /// Exact comparison by cross-multiplied integers.
    pub fn cmp_under(&self, other: &PerceivedCost, beta: Rational) -> Ordering {
        let key = |c: &PerceivedCost| {
            // (f + b*r) with f = fn/fd, r = rn/rd, b = bn/bd, over common denominator.
            let (fnum, fden) = (c.first_step.numer() as i128, c.first_step.denom() as i128);
            let (rnum, rden) = (c.remainder.numer() as i128, c.remainder.denom() as i128);
            let (bn, bd) = (beta.numer() as i128, beta.denom() as i128);
            (fnum * bd * rden + bn * rnum * fden, fden * bd * rden)
        };
        let (a_num, a_den) = key(self);
        let (b_num, b_den) = key(other);
        (a_num * b_den).cmp(&(b_num * a_den))
    }
}

/// Agent preference order: smaller perceived value first, then smaller rank.
pub fn compare_candidates(
    beta: Rational,
    c1: &PerceivedCost,
    a1: &Arc,
    c2: &PerceivedCost,
    a2: &Arc,
) -> Ordering {
    c1.cmp_under(c2, beta).then(a1.rank.cmp(&a2.rank))
}

/// Integer image of an instance's weights: every weight and the reward are
/// multiplied by the lcm of their denominators, and `beta = num/den`.
///
/// The agent prefers arc `e` over `e'` iff
/// `den*w(e) + num*D(head e) < den*w(e') + num*D(head e')`, which is what
/// [`Scaled::perceived`] computes.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub scale: i64,
    pub weight: Vec<i64>,
    pub reward: i64,
    pub beta_num: i64,
    pub beta_den: i64,
}

impl Scaled {
    pub fn new(inst: &Instance) -> Self {
        let scale = inst
            .arcs
            .iter()
            .map(|a| a.weight.denom())
            .chain([inst.r.denom()])
            .fold(1i64, |acc, d| acc.lcm(&d));
        let to_ticks = |q: Rational| q.numer() * (scale / q.denom());
        Scaled {
            scale,
            weight: inst.arcs.iter().map(|a| to_ticks(a.weight)).collect(),
            reward: to_ticks(inst.r),
            beta_num: inst.beta.numer(),
            beta_den: inst.beta.denom(),
        }
    }

    /// Perceived cost of stepping with `first` ticks then facing `rest` ticks,
    /// scaled by `beta_den`.
    #[inline]
    pub fn perceived(&self, first: i64, rest: i64) -> i128 {
        self.beta_den as i128 * first as i128 + self.beta_num as i128 * rest as i128
    }

    /// `beta * r` on the same scale as [`Scaled::perceived`].
    #[inline]
    pub fn threshold(&self) -> i128 {
        self.beta_num as i128 * self.reward as i128
    }

    pub fn to_rational(&self, ticks: i64) -> Rational {
        Rational::new(ticks, self.scale)
    }

    pub fn to_ticks(&self, q: Rational) -> Option<i64> {
        let v = Rational::new(q.numer(), 1) * Rational::new(self.scale, q.denom());
        v.is_integer().then(|| v.numer())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::fixture_fig1;
    use proptest::prelude::*;

    fn arc(id: ArcId, tail: VertexId, head: VertexId, w: i64, kind: ArcKind) -> Arc {
        Arc { id, tail, head, weight: w.into(), kind, rank: id }
    }

    #[test]
    fn fig1_is_valid() {
        assert_eq!(fixture_fig1().validate(), vec![]);
    }

    #[test]
    fn back_arc_is_a_cycle() {
        let mut inst = fixture_fig1();
        let id = inst.m();
        inst.arcs.push(arc(id, inst.t, inst.s, 1, ArcKind::Addable));
        let v = inst.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Cycle { .. }));
    }

    #[test]
    fn critical_must_be_base() {
        let mut inst = fixture_fig1();
        inst.critical.insert(10);
        assert_eq!(inst.validate(), vec![Violation::CriticalNotBase { arc: 10 }]);
    }

    #[test]
    fn other_violations() {
        let mut inst = fixture_fig1();
        inst.beta = Rational::new(3, 2);
        inst.t = inst.s;
        inst.arcs[0].weight = Rational::from_integer(-1);
        inst.arcs[1].head = 99;
        let v = inst.validate();
        assert!(v.contains(&Violation::BetaOutOfRange));
        assert!(v.contains(&Violation::SourceIsTarget));
        assert!(v.contains(&Violation::NegativeWeight { arc: 0 }));
        assert!(v.contains(&Violation::DanglingVertex { arc: 1, vertex: 99 }));
    }

    #[test]
    fn normalize_fig1_is_identity() {
        let inst = fixture_fig1();
        let norm = inst.normalize().unwrap();
        assert_eq!(norm.instance, inst);
        assert_eq!(norm.vertex_map, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn normalize_prunes_isolated_vertex() {
        let mut inst = fixture_fig1();
        inst.n += 1;
        let norm = inst.normalize().unwrap();
        assert_eq!(norm.instance, fixture_fig1());
    }

    #[test]
    fn normalize_rejects_pruned_critical_arc() {
        let mut inst = fixture_fig1();
        // Dangling arc t' <- d with x unreachable to t.
        inst.n += 1;
        let id = inst.m();
        inst.arcs.push(arc(id, 4, 8, 1, ArcKind::Base));
        inst.critical = [id].into();
        assert_eq!(inst.normalize().unwrap_err(), Error::CriticalArcUnreachable(id));
    }

    #[test]
    fn compare_candidates_examples() {
        let half = Rational::new(1, 2);
        let a = arc(0, 0, 1, 0, ArcKind::Base);
        let mut b = arc(1, 0, 2, 0, ArcKind::Base);
        let c1 = PerceivedCost::new(10, 12);
        let c2 = PerceivedCost::new(10, 16);
        assert_eq!(compare_candidates(half, &c1, &a, &c2, &b), Ordering::Less);
        assert_eq!(c1.value(half), Rational::from_integer(16));

        let mut a3 = a.clone();
        a3.rank = 3;
        b.rank = 7;
        let eq = PerceivedCost::new(4, 2);
        assert_eq!(compare_candidates(half, &eq, &a3, &eq, &b), Ordering::Less);
        assert_eq!(compare_candidates(half, &eq, &b, &eq, &a3), Ordering::Greater);

        // Gadget decision: x = S + 2 with S = 5, beta = 1/4 + 1/100, S' = x - 3.
        let beta = Rational::new(1, 4) + Rational::new(1, 100);
        let x = 7;
        let via_v1 = PerceivedCost::new(1, x - 3);
        let via_b = PerceivedCost::new(0, x + 1);
        assert_eq!(compare_candidates(beta, &via_v1, &a, &via_b, &b), Ordering::Less);
    }

    #[test]
    fn apply_examples() {
        let inst = fixture_fig1();
        let view = inst.apply(&EditPlan::new([5], [10])).unwrap();
        assert_eq!(view.arc_count(), 10);
        assert!(!view.contains(5) && view.contains(10));

        assert_eq!(inst.apply(&EditPlan::default()).unwrap(), inst.base_view());

        let out_of_s: Vec<ArcId> = inst.arcs.iter().filter(|a| a.tail == inst.s).map(|a| a.id).collect();
        let view = inst.apply(&EditPlan::new(out_of_s, [])).unwrap();
        assert_eq!(view.out_degree(inst.s), 0);

        assert_eq!(inst.apply(&EditPlan::new([42], [])).unwrap_err(), Error::UnknownArcId(42));
        assert!(matches!(
            inst.apply(&EditPlan::new([10], [])).unwrap_err(),
            Error::WrongArcKind { arc: 10, .. }
        ));
    }

    proptest! {
        #[test]
        fn compare_is_a_total_order(
            vals in proptest::collection::vec((0i64..6, 0i64..6), 3),
            ranks in Just(vec![0usize, 1, 2]).prop_shuffle(),
            b in 1i64..5,
        ) {
            let beta = Rational::new(1, b);
            let arcs: Vec<Arc> = (0..3).map(|i| Arc { rank: ranks[i], ..arc(i, 0, 1, 0, ArcKind::Base) }).collect();
            let costs: Vec<PerceivedCost> = vals.iter().map(|&(f, r)| PerceivedCost::new(f, r)).collect();
            let cmp = |i: usize, j: usize| compare_candidates(beta, &costs[i], &arcs[i], &costs[j], &arcs[j]);
            for i in 0..3 {
                prop_assert_eq!(cmp(i, i), Ordering::Equal);
                for j in 0..3 {
                    prop_assert_eq!(cmp(i, j), cmp(j, i).reverse());
                    if i != j { prop_assert_ne!(cmp(i, j), Ordering::Equal); }
                    for k in 0..3 {
                        if cmp(i, j) == Ordering::Less && cmp(j, k) == Ordering::Less {
                            prop_assert_eq!(cmp(i, k), Ordering::Less);
                        }
                    }
                }
            }
        }

        #[test]
        fn disjoint_edits_commute(dels in proptest::collection::btree_set(0usize..10, 0..4),
                                  other in proptest::collection::btree_set(0usize..10, 0..4)) {
            let inst = fixture_fig1();
            let p = EditPlan::new(dels.iter().copied(), []);
            let q = EditPlan::new(other.difference(&dels).copied(), [10]);
            let pq = inst.apply(&p.union(&q)).unwrap();
            let qp = inst.apply(&q.union(&p)).unwrap();
            prop_assert_eq!(&pq, &qp);
            for a in &inst.arcs {
                let expect = if a.is_base() { !p.deletions.contains(&a.id) && !q.deletions.contains(&a.id) } else { true };
                prop_assert_eq!(pq.contains(a.id), expect);
            }
        }
    }
}
