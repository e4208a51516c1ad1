//! Literal evaluation of the eight conditions that define a DP value, on a
//! concrete arc set. Exponential in the number of paths; meant as a test
//! oracle for the transitions in [`crate::tw`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{ArcId, Instance, VertexId};
use crate::rational::Rational;
use crate::sim::Agent;
use crate::tw::t_avoiding_table;

/// `None` encodes infinity.
pub type Dist = Option<Rational>;

/// A DP profile over the vertices of `bag`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub bag: BTreeSet<VertexId>,
    pub dist: BTreeMap<VertexId, Dist>,
    /// Vertices with `d = 1`.
    pub dist_realized: BTreeSet<VertexId>,
    pub reached: BTreeSet<VertexId>,
    /// `(F0, F1)` per reached vertex.
    pub follow: BTreeMap<VertexId, (Rational, Rational)>,
    /// Reached vertices with `f = 1`.
    pub follow_realized: BTreeSet<VertexId>,
}

impl Profile {
    /// Profile with every vertex in the bag, read off the graph `present`:
    /// true distances, the vertices the agent can visit under any tie
    /// resolution, and for each of them its lowest-ranked best arc. Only t
    /// has its bits set.
    pub fn full_scope(inst: &Instance, present: &[bool]) -> Profile {
        let agent = Agent::new(inst);
        let ticks = agent.distances(present);
        let to_dist = |x: i64| (x != crate::sim::INF).then(|| agent.scaled.to_rational(x));
        let mut reached = BTreeSet::new();
        let mut follow = BTreeMap::new();
        let mut stack = vec![inst.s];
        reached.insert(inst.s);
        while let Some(v) = stack.pop() {
            if v == inst.t {
                continue;
            }
            let Some((_, list)) = agent.choices(v, present, &ticks) else { continue };
            let e = &inst.arcs[list[0]];
            let rest = agent.scaled.to_rational(ticks[e.head]);
            follow.insert(v, (e.weight + rest, rest));
            for &id in &list {
                if reached.insert(inst.arcs[id].head) {
                    stack.push(inst.arcs[id].head);
                }
            }
        }
        follow.insert(inst.t, (Rational::ZERO, Rational::ZERO));
        reached.insert(inst.t);
        Profile {
            bag: (0..inst.n).collect(),
            dist: (0..inst.n).map(|v| (v, to_dist(ticks[v]))).collect(),
            dist_realized: [inst.t].into(),
            reached,
            follow,
            follow_realized: [inst.t].into(),
        }
    }

    /// Restriction to the bag {s, t}.
    pub fn root_projection(&self, inst: &Instance) -> Profile {
        let keep: BTreeSet<VertexId> = [inst.s, inst.t].into();
        let pick_set = |s: &BTreeSet<VertexId>| s.intersection(&keep).copied().collect();
        Profile {
            bag: keep.clone(),
            dist: self.dist.iter().filter(|(v, _)| keep.contains(v)).map(|(&v, &d)| (v, d)).collect(),
            dist_realized: pick_set(&self.dist_realized),
            reached: pick_set(&self.reached),
            follow: self.follow.iter().filter(|(v, _)| keep.contains(v)).map(|(&v, &f)| (v, f)).collect(),
            follow_realized: pick_set(&self.follow_realized),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionViolation {
    /// 1 to 8.
    pub condition: u8,
    pub vertex: VertexId,
    pub detail: String,
}

impl fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {} at vertex {}: {}", self.condition, self.vertex, self.detail)
    }
}

fn plus(a: Dist, b: Dist) -> Dist {
    Some(a? + b?)
}

/// `a <= b` with infinity on top.
fn le(a: Dist, b: Dist) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

fn lt(a: Dist, b: Dist) -> bool {
    !le(b, a)
}

/// Evaluates the eight conditions for `profile` on the arcs `present`.
pub fn check_conditions(inst: &Instance, profile: &Profile, present: &[bool]) -> Vec<ConditionViolation> {
    let n = inst.n;
    let br = Some(inst.beta_r());
    let mut out = Vec::new();
    let mut violation = |condition: u8, vertex: VertexId, detail: String| {
        out.push(ConditionViolation { condition, vertex, detail });
    };
    let out_arcs: Vec<Vec<ArcId>> =
        inst.out_arcs().into_iter().map(|l| l.into_iter().filter(|&a| present[a]).collect()).collect();
    // All-pairs distances inside the arc set.
    let order = inst.topological_order().expect("acyclic instance");
    let mut pair: Vec<Vec<Dist>> = vec![vec![None; n]; n];
    for &u in order.iter().rev() {
        pair[u][u] = Some(Rational::ZERO);
        for &id in &out_arcs[u] {
            let (h, w) = (inst.arcs[id].head, inst.arcs[id].weight);
            for v in 0..n {
                let via = plus(Some(w), pair[h][v]);
                if lt(via, pair[u][v]) {
                    pair[u][v] = via;
                }
            }
        }
    }
    let d_of = |v: VertexId| profile.dist.get(&v).copied().flatten();
    let through_bag = |u: VertexId| -> Dist {
        profile
            .bag
            .iter()
            .filter(|&&v| v != u)
            .map(|&v| plus(pair[u][v], d_of(v)))
            .fold(None, |acc, x| if lt(x, acc) { x } else { acc })
    };
    let dist_p: Vec<Dist> = (0..n)
        .map(|u| {
            if profile.bag.contains(&u) && profile.dist_realized.contains(&u) {
                d_of(u)
            } else {
                through_bag(u)
            }
        })
        .collect();
    let value = |id: ArcId| -> Dist {
        let a = &inst.arcs[id];
        plus(Some(a.weight), dist_p[a.head].map(|x| x * inst.beta))
    };
    let follow_value = |u: VertexId| -> Option<Dist> {
        profile.follow.get(&u).map(|&(f0, f1)| Some(f0 - f1 + f1 * inst.beta))
    };

    for &u in &profile.bag {
        if !le(d_of(u), through_bag(u)) {
            violation(1, u, "distance exceeds a path through the bag".into());
        }
        if !profile.dist_realized.contains(&u) && d_of(u) != dist_p[u] {
            violation(2, u, "distance is not realized".into());
        }
    }
    for &u in &profile.reached {
        if u == inst.t {
            continue;
        }
        let Some(fv) = follow_value(u) else {
            violation(4, u, "reached vertex without a follow pair".into());
            continue;
        };
        for &id in &out_arcs[u] {
            if !le(fv, value(id)) {
                violation(3, u, format!("arc {id} looks better than the follow arc"));
            }
        }
        if !le(fv, br) {
            violation(4, u, "the agent abandons".into());
        }
        if !profile.follow_realized.contains(&u) {
            let (f0, f1) = profile.follow[&u];
            let real = out_arcs[u]
                .iter()
                .any(|&id| dist_p[inst.arcs[id].head] == Some(f1) && f0 == inst.arcs[id].weight + f1);
            if !real {
                violation(5, u, "no arc realizes the follow pair".into());
            }
        }
    }

    // Paths whose every step is a best choice that the agent does not abandon.
    let good = |id: ArcId| -> bool {
        let v = value(id);
        le(v, br) && out_arcs[inst.arcs[id].tail].iter().all(|&alt| le(v, value(alt)))
    };
    let avoiding = t_avoiding_table(inst);
    for &u in &profile.reached {
        let mut reaches_r = false;
        // (vertex, whether the path so far uses a T-avoiding arc)
        let mut stack: Vec<(VertexId, Option<ArcId>)> = vec![(u, None)];
        let mut seen: BTreeSet<(VertexId, Option<ArcId>)> = BTreeSet::new();
        while let Some((x, bad)) = stack.pop() {
            for &id in &out_arcs[x] {
                if !good(id) {
                    continue;
                }
                let y = inst.arcs[id].head;
                let bad = bad.or(avoiding[id].then_some(id));
                if profile.reached.contains(&y) {
                    reaches_r = true;
                    if let Some(a) = bad {
                        violation(7, u, format!("agent path to {y} uses T-avoiding arc {a}"));
                    }
                } else {
                    violation(8, u, format!("agent can walk to {y} outside R"));
                }
                if seen.insert((y, bad)) {
                    stack.push((y, bad));
                }
            }
        }
        if !profile.follow_realized.contains(&u) && !reaches_r {
            violation(6, u, "no agent path to another reached vertex".into());
        }
    }
    out.sort_by(|a, b| (a.condition, a.vertex, &a.detail).cmp(&(b.condition, b.vertex, &b.detail)));
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fixture_fig1, gen_random, RandomParams};
    use crate::model::EditPlan;
    use crate::tw::{dp_solve, TwOptions};
    use proptest::prelude::*;

    fn fig1_solution() -> (Instance, Vec<bool>) {
        let inst = fixture_fig1();
        let present = inst.apply(&EditPlan::new([5], [10])).unwrap().present;
        (inst, present)
    }

    #[test]
    fn fig1_solution_satisfies_all() {
        let (inst, present) = fig1_solution();
        let p = Profile::full_scope(&inst, &present);
        assert_eq!(p.reached, [0, 1, 2, 5, 7].into());
        assert_eq!(check_conditions(&inst, &p, &present), vec![]);
        let root = p.root_projection(&inst);
        assert_eq!(root.dist[&0], Some(Rational::from_integer(26)));
        assert_eq!(root.follow[&0], (Rational::from_integer(26), Rational::from_integer(16)));
    }

    #[test]
    fn planted_avoiding_arc_breaks_condition_seven() {
        let (inst, mut present) = fig1_solution();
        let p = Profile::full_scope(&inst, &present);
        present[5] = true;
        let v = check_conditions(&inst, &p, &present);
        assert!(v.iter().any(|x| x.condition == 7), "{v:?}");
        // The profile read off the new graph still walks through (b,f).
        let q = Profile::full_scope(&inst, &present);
        assert!(check_conditions(&inst, &q, &present).iter().any(|x| x.condition == 7));
    }

    #[test]
    fn understated_distance_breaks_condition_two() {
        let (inst, present) = fig1_solution();
        let mut p = Profile::full_scope(&inst, &present);
        p.dist.insert(0, Some(Rational::from_integer(20)));
        let v = check_conditions(&inst, &p, &present);
        assert!(v.iter().any(|x| x.condition == 2 && x.vertex == 0), "{v:?}");
    }

    #[test]
    fn abandoning_reward_breaks_condition_four() {
        let (mut inst, present) = fig1_solution();
        let p = Profile::full_scope(&inst, &present);
        inst.r = Rational::from_integer(10);
        assert!(check_conditions(&inst, &p, &present).iter().any(|x| x.condition == 4));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn dp_plans_satisfy_conditions(seed in 0u64..50_000) {
            let inst = gen_random(&RandomParams { seed, n: 6, target_arcs: 10, weight_range: (0, 4), ..RandomParams::default() }).unwrap();
            if let (Some(sol), _) = dp_solve(&inst, &TwOptions::default()).unwrap() {
                let present = inst.apply(&sol.plan).unwrap().present;
                let p = Profile::full_scope(&inst, &present);
                prop_assert_eq!(check_conditions(&inst, &p, &present), vec![]);
                let root = p.root_projection(&inst);
                prop_assert_eq!(root.dist[&inst.s], Some(sol.root.dist));
            }
        }
    }
}
