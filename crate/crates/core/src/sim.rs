//! The present-biased agent: shortest distances, a deterministic walk and an
//! enumeration over all tie resolutions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ArcId, GraphView, Instance, PerceivedCost, Scaled, VertexId};
use crate::rational::Rational;

/// Sentinel for "t unreachable" in tick distances.
pub const INF: i64 = i64::MAX;

pub const DEFAULT_BRANCH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Reached(Vec<ArcId>),
    Abandoned(VertexId),
}

impl Outcome {
    pub fn path(&self) -> Option<&[ArcId]> {
        match self {
            Outcome::Reached(p) => Some(p),
            Outcome::Abandoned(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub at: VertexId,
    pub chosen: Option<ArcId>,
    pub chosen_cost: Option<PerceivedCost>,
    #[serde(with = "crate::rational::fraction")]
    pub threshold: Rational,
    pub alternatives: Vec<(ArcId, PerceivedCost)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentOutcome {
    pub result: Outcome,
    pub trace: Vec<StepRecord>,
}

/// True iff the outcome reached t through every arc of `critical`.
pub fn follows_tpath(outcome: &Outcome, critical: &BTreeSet<ArcId>) -> bool {
    match outcome {
        Outcome::Reached(path) => critical.iter().all(|c| path.contains(c)),
        Outcome::Abandoned(_) => false,
    }
}

/// Perceived cost of committing to `path` as a whole: first arc in full,
/// the rest discounted.
pub fn path_perceived_cost(inst: &Instance, path: &[ArcId]) -> PerceivedCost {
    let first = path.first().map_or(Rational::ZERO, |&id| inst.arcs[id].weight);
    let rest = path.iter().skip(1).map(|&id| inst.arcs[id].weight).sum();
    PerceivedCost { first_step: first, remainder: rest }
}

/// Shortest distance to t for every vertex, `None` when t is unreachable.
pub fn dist_to_target(view: &GraphView<'_>) -> Vec<Option<Rational>> {
    let agent = Agent::new(view.instance);
    let scaled = &agent.scaled;
    agent
        .distances(&view.present)
        .into_iter()
        .map(|d| (d != INF).then(|| scaled.to_rational(d)))
        .collect()
}

pub fn simulate(view: &GraphView<'_>) -> AgentOutcome {
    Agent::new(view.instance).simulate_traced(&view.present)
}

/// All outcomes reachable under some resolution of perceived-cost ties.
pub fn simulate_all(view: &GraphView<'_>, cap: usize) -> Result<Vec<Outcome>> {
    Agent::new(view.instance).outcomes(&view.present, cap)
}

/// Precomputed agent for one weighted graph; views are passed as arc masks.
#[derive(Debug, Clone)]
pub struct Agent<'a> {
    pub instance: &'a Instance,
    pub scaled: Scaled,
    out: Vec<Vec<ArcId>>,
    order: Vec<VertexId>,
}

impl<'a> Agent<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Agent {
            instance,
            scaled: Scaled::new(instance),
            out: instance.out_arcs(),
            order: instance.topological_order().expect("acyclic instance"),
        }
    }

    pub fn distances(&self, present: &[bool]) -> Vec<i64> {
        let arcs = &self.instance.arcs;
        let mut dist = vec![INF; self.instance.n];
        dist[self.instance.t] = 0;
        for &v in self.order.iter().rev() {
            if v == self.instance.t {
                continue;
            }
            for &id in &self.out[v] {
                let h = arcs[id].head;
                if present[id] && dist[h] != INF {
                    dist[v] = dist[v].min(self.scaled.weight[id] + dist[h]);
                }
            }
        }
        dist
    }

    /// Perceived value of taking arc `id` (already scaled by beta's denominator).
    #[inline]
    fn value(&self, id: ArcId, dist: &[i64]) -> Option<i128> {
        let h = self.instance.arcs[id].head;
        (dist[h] != INF).then(|| self.scaled.perceived(self.scaled.weight[id], dist[h]))
    }

    /// Minimum perceived value at `v` and the present arcs attaining it, in
    /// rank order; `None` when the agent abandons at `v`.
    pub fn choices(&self, v: VertexId, present: &[bool], dist: &[i64]) -> Option<(i128, Vec<ArcId>)> {
        let mut best: Option<(i128, Vec<ArcId>)> = None;
        for &id in &self.out[v] {
            if !present[id] {
                continue;
            }
            let Some(val) = self.value(id, dist) else { continue };
            match &mut best {
                Some((b, list)) if val == *b => list.push(id),
                Some((b, _)) if val > *b => {}
                _ => best = Some((val, vec![id])),
            }
        }
        best.filter(|(b, _)| *b <= self.scaled.threshold())
    }

    /// Deterministic walk; ties go to the smallest rank.
    pub fn simulate(&self, present: &[bool]) -> Outcome {
        let dist = self.distances(present);
        let mut v = self.instance.s;
        let mut path = Vec::new();
        while v != self.instance.t {
            match self.choices(v, present, &dist) {
                Some((_, list)) => {
                    path.push(list[0]);
                    v = self.instance.arcs[list[0]].head;
                }
                None => return Outcome::Abandoned(v),
            }
        }
        Outcome::Reached(path)
    }

    pub fn simulate_traced(&self, present: &[bool]) -> AgentOutcome {
        let inst = self.instance;
        let dist = self.distances(present);
        let threshold = inst.beta_r();
        let to_q = |d: i64| self.scaled.to_rational(d);
        let mut v = inst.s;
        let mut path = Vec::new();
        let mut trace = Vec::new();
        while v != inst.t {
            let alternatives: Vec<(ArcId, PerceivedCost)> = self.out[v]
                .iter()
                .filter(|&&id| present[id] && dist[inst.arcs[id].head] != INF)
                .map(|&id| {
                    let a = &inst.arcs[id];
                    (id, PerceivedCost { first_step: a.weight, remainder: to_q(dist[a.head]) })
                })
                .collect();
            let pick = self.choices(v, present, &dist).map(|(_, list)| list[0]);
            let chosen_cost = match pick {
                Some(id) => alternatives.iter().find(|(a, _)| *a == id).map(|(_, c)| *c),
                None => alternatives
                    .iter()
                    .min_by(|x, y| x.1.cmp_under(&y.1, inst.beta))
                    .map(|(_, c)| *c),
            };
            trace.push(StepRecord { at: v, chosen: pick, chosen_cost, threshold, alternatives });
            match pick {
                Some(id) => {
                    path.push(id);
                    v = inst.arcs[id].head;
                }
                None => return AgentOutcome { result: Outcome::Abandoned(v), trace },
            }
        }
        AgentOutcome { result: Outcome::Reached(path), trace }
    }

    /// Enumerates every outcome over all tie resolutions (rank ignored).
    pub fn outcomes(&self, present: &[bool], cap: usize) -> Result<Vec<Outcome>> {
        let dist = self.distances(present);
        let mut found = BTreeSet::new();
        let mut branches = 0usize;
        let mut stack = vec![(self.instance.s, Vec::new())];
        while let Some((v, path)) = stack.pop() {
            if v == self.instance.t {
                found.insert(Outcome::Reached(path));
                continue;
            }
            match self.choices(v, present, &dist) {
                None => {
                    found.insert(Outcome::Abandoned(v));
                }
                Some((_, list)) => {
                    branches += list.len() - 1;
                    if branches > cap {
                        return Err(Error::ExplosionGuard(cap));
                    }
                    for &id in list.iter().rev() {
                        let mut p = path.clone();
                        p.push(id);
                        stack.push((self.instance.arcs[id].head, p));
                    }
                }
            }
        }
        Ok(found.into_iter().collect())
    }

    /// Whether every tie resolution reaches t through all critical arcs.
    ///
    /// Works on the graph of arcs the agent may take: no reachable vertex may
    /// abandon, and removing any one critical arc must disconnect s from t.
    pub fn robust_feasible(&self, present: &[bool]) -> bool {
        let inst = self.instance;
        let dist = self.distances(present);
        let n = inst.n;
        let mut moves: Vec<Vec<ArcId>> = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        let mut stack = vec![inst.s];
        seen[inst.s] = true;
        while let Some(v) = stack.pop() {
            if v == inst.t {
                continue;
            }
            let Some((_, list)) = self.choices(v, present, &dist) else { return false };
            for &id in &list {
                let h = inst.arcs[id].head;
                if !seen[h] {
                    seen[h] = true;
                    stack.push(h);
                }
            }
            moves[v] = list;
        }
        // The agent always moves toward t and cannot loop, so t is reached.
        inst.critical.iter().all(|&c| {
            let mut reach = vec![false; n];
            let mut stack = vec![inst.s];
            reach[inst.s] = true;
            while let Some(v) = stack.pop() {
                for &id in &moves[v] {
                    let h = inst.arcs[id].head;
                    if id != c && !reach[h] {
                        reach[h] = true;
                        stack.push(h);
                    }
                }
            }
            !reach[inst.t]
        })
    }

    /// Deterministic-walk feasibility.
    pub fn lex_feasible(&self, present: &[bool]) -> bool {
        follows_tpath(&self.simulate(present), &self.instance.critical)
    }

    /// Whether some vertex reachable by the agent has a perceived-cost tie.
    pub fn has_tie(&self, present: &[bool]) -> bool {
        let dist = self.distances(present);
        let mut seen = vec![false; self.instance.n];
        let mut stack = vec![self.instance.s];
        seen[self.instance.s] = true;
        while let Some(v) = stack.pop() {
            if v == self.instance.t {
                continue;
            }
            if let Some((_, list)) = self.choices(v, present, &dist) {
                if list.len() > 1 {
                    return true;
                }
                let h = self.instance.arcs[list[0]].head;
                if !seen[h] {
                    seen[h] = true;
                    stack.push(h);
                }
            }
        }
        false
    }
}
