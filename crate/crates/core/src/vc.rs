//! Exact solver for lexicographic semantics whose search space is bounded by
//! the vertex cover of G+A.
//!
//! A guess fixes the agent's path `P` through all critical arcs and a set `R`
//! of arcs that realize shortest distances from every vertex of
//! `S = C ∪ V(P)` (`C` a vertex cover). Given a guess, the deletions are
//! forced between vertices of `S`, and outside `S` they reduce to one
//! bipartite hitting-set problem per vertex.

use std::collections::BTreeSet;
use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matching::{solve_pair_hitting, PairSystem};
use crate::model::{ArcId, ArcKind, EditPlan, Instance, Scaled, VertexId};
use crate::oracle::Solution;
use crate::sim::{Agent, INF};
use crate::treedecomp::skeleton;

/// Both endpoints of a greedily built maximal matching.
pub fn approx_vertex_cover(n: usize, edges: &[(VertexId, VertexId)]) -> BTreeSet<VertexId> {
    let mut covered = vec![false; n];
    let mut cover = BTreeSet::new();
    for &(x, y) in edges {
        if x != y && !covered[x] && !covered[y] {
            covered[x] = true;
            covered[y] = true;
            cover.insert(x);
            cover.insert(y);
        }
    }
    cover
}

/// The agent's path, the vertices of `S`, and the distance witnesses `R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Guess {
    pub path: Vec<ArcId>,
    pub critical_vertices: BTreeSet<VertexId>,
    pub witness: BTreeSet<ArcId>,
}

#[derive(Debug, Clone, Default)]
pub struct VcOptions {
    /// Vertex cover of the skeleton of G+A to use instead of the
    /// 2-approximation.
    pub cover_hint: Option<Vec<VertexId>>,
    pub deadline: Option<Instant>,
    /// Abort with [`Error::TooLarge`] beyond this many guesses.
    pub max_guesses: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VcStats {
    pub cover_size: usize,
    pub paths: usize,
    /// Distinct `(P, R)` pairs that pass the reward check.
    pub guesses: usize,
    pub wall_ms: u128,
}

/// Per-guess data that does not depend on which arcs are addable.
struct Analysis {
    /// Arcs between vertices of `S` that must be absent.
    x1: Vec<ArcId>,
    /// Obstruction pairs per vertex outside `S`.
    pairs: Vec<Vec<(ArcId, ArcId)>>,
}

struct Ctx<'a> {
    inst: &'a Instance,
    agent: Agent<'a>,
    sc: Scaled,
    out: Vec<Vec<ArcId>>,
    inn: Vec<Vec<ArcId>>,
    cover: BTreeSet<VertexId>,
}

impl<'a> Ctx<'a> {
    fn new(inst: &'a Instance, cover_hint: Option<&[VertexId]>) -> Result<Self> {
        let sk = skeleton(inst);
        let cover = match cover_hint {
            Some(h) => {
                let c: BTreeSet<VertexId> = h.iter().copied().collect();
                if let Some(&(x, y)) = sk.iter().find(|(x, y)| !c.contains(x) && !c.contains(y)) {
                    return Err(Error::InvalidCover(x, y));
                }
                c
            }
            None => approx_vertex_cover(inst.n, &sk),
        };
        Ok(Ctx {
            inst,
            agent: Agent::new(inst),
            sc: Scaled::new(inst),
            out: inst.out_arcs(),
            inn: inst.in_arcs(),
            cover,
        })
    }

    /// Every s-t path of G+A, as arc lists.
    fn paths(&self) -> Vec<Vec<ArcId>> {
        let mut out = Vec::new();
        let mut stack = vec![(self.inst.s, Vec::new())];
        while let Some((v, path)) = stack.pop() {
            if v == self.inst.t {
                out.push(path);
                continue;
            }
            for &id in self.out[v].iter().rev() {
                let mut p = path.clone();
                p.push(id);
                stack.push((self.inst.arcs[id].head, p));
            }
        }
        out
    }

    fn vertices_of(&self, path: &[ArcId]) -> Vec<VertexId> {
        let mut vs = vec![self.inst.s];
        vs.extend(path.iter().map(|&id| self.inst.arcs[id].head));
        vs
    }

    /// Ways to extend `R` by one shortest-path step out of `v`: nothing, one
    /// arc into `S`, or two arcs through a vertex outside `S`.
    fn hops(&self, v: VertexId, in_s: &[bool]) -> Vec<Vec<ArcId>> {
        let mut hops = vec![vec![]];
        for &e in &self.out[v] {
            let x = self.inst.arcs[e].head;
            if in_s[x] {
                hops.push(vec![e]);
            } else {
                for &f in &self.out[x] {
                    if in_s[self.inst.arcs[f].head] {
                        hops.push(vec![e, f]);
                    }
                }
            }
        }
        hops
    }

    /// `q·w + p·rest`, or `None` when `rest` is infinite.
    fn value(&self, w: i64, rest: i64) -> Option<i128> {
        (rest != INF).then(|| self.sc.perceived(w, rest))
    }

    /// Whether the alternative `(alt, alt_value)` beats path arc `e`.
    fn beats(&self, alt: ArcId, alt_value: Option<i128>, e: ArcId, e_value: i128) -> bool {
        match alt_value {
            None => false,
            Some(a) => a < e_value || (a == e_value && self.inst.arcs[alt].rank < self.inst.arcs[e].rank),
        }
    }

    /// `None` when the guess violates the reward check or forces deleting a
    /// witness arc.
    fn analyse(&self, path: &[ArcId], in_s: &[bool], in_r: &[bool]) -> Option<Analysis> {
        let inst = self.inst;
        let dist = self.agent.distances(in_r);
        let threshold = self.sc.threshold();
        // Path arc leaving each path vertex and its perceived value.
        let mut leaving: Vec<Option<(ArcId, i128)>> = vec![None; inst.n];
        for &e in path {
            let a = &inst.arcs[e];
            let v = self.value(self.sc.weight[e], dist[a.head])?;
            if v > threshold {
                return None;
            }
            leaving[a.tail] = Some((e, v));
        }
        let mut x1 = Vec::new();
        for a in &inst.arcs {
            if !in_s[a.tail] || !in_s[a.head] {
                continue;
            }
            let (dx, dy) = (dist[a.tail], dist[a.head]);
            let shortcut = dy != INF && (dx == INF || dx > self.sc.weight[a.id] + dy);
            let turn = leaving[a.tail].is_some_and(|(e, ev)| {
                e != a.id && self.beats(a.id, self.value(self.sc.weight[a.id], dy), e, ev)
            });
            if shortcut || turn {
                if in_r[a.id] {
                    return None;
                }
                x1.push(a.id);
            }
        }
        let mut pairs = vec![Vec::new(); inst.n];
        for v in (0..inst.n).filter(|&v| !in_s[v]) {
            for &e1 in &self.inn[v] {
                let x = inst.arcs[e1].tail;
                for &e2 in &self.out[v] {
                    let y = inst.arcs[e2].head;
                    let (dx, dy) = (dist[x], dist[y]);
                    let w2 = self.sc.weight[e1] + self.sc.weight[e2];
                    let shortcut = dy != INF && (dx == INF || dx > w2 + dy);
                    let turn = leaving[x].is_some_and(|(e, ev)| {
                        let rest = if dy == INF { INF } else { self.sc.weight[e2] + dy };
                        self.beats(e1, self.value(self.sc.weight[e1], rest), e, ev)
                    });
                    if shortcut || turn {
                        pairs[v].push((e1, e2));
                    }
                }
            }
        }
        Some(Analysis { x1, pairs })
    }
}

/// Cheapest completion of a guess for one variant, or `None`.
fn complete(variant: &Instance, in_r: &[bool], an: &Analysis, budget: usize) -> Option<(usize, EditPlan)> {
    let addable = |id: ArcId| variant.arcs[id].kind == ArcKind::Addable;
    let additions: Vec<ArcId> = (0..variant.m()).filter(|&id| in_r[id] && addable(id)).collect();
    if additions.len() >= budget {
        return None;
    }
    let mut deletions: BTreeSet<ArcId> = an.x1.iter().copied().filter(|&id| !addable(id)).collect();
    let forbidden: BTreeSet<ArcId> = (0..variant.m()).filter(|&id| in_r[id]).collect();
    for pairs in &an.pairs {
        // Addable arcs outside R are absent, so their pairs need no hit.
        let live: Vec<(ArcId, ArcId)> = pairs
            .iter()
            .copied()
            .filter(|&(a, b)| (in_r[a] || !addable(a)) && (in_r[b] || !addable(b)))
            .collect();
        if live.is_empty() {
            continue;
        }
        let sys = PairSystem {
            side_a: live.iter().map(|p| p.0).collect(),
            side_b: live.iter().map(|p| p.1).collect(),
            pairs: live,
            forbidden: forbidden.clone(),
        };
        deletions.extend(solve_pair_hitting(&sys)?);
        if additions.len() + deletions.len() >= budget {
            return None;
        }
    }
    let cost = additions.len() + deletions.len();
    (cost < budget).then(|| (cost, EditPlan::new(deletions, additions)))
}

/// Calls `f` on every distinct guess that passes the reward check, together
/// with its witness mask and analysis. Stops early when `f` returns an error.
fn for_each_guess(
    ctx: &Ctx<'_>,
    opts: &VcOptions,
    stats: &mut VcStats,
    mut f: impl FnMut(&[ArcId], &[bool], &[bool], &Analysis) -> Result<()>,
) -> Result<()> {
    let inst = ctx.inst;
    let paths = ctx.paths();
    stats.cover_size = ctx.cover.len();
    stats.paths = paths.len();
    let mut visited = 0usize;
    for path in &paths {
        let mut in_s = vec![false; inst.n];
        for &v in ctx.cover.iter().chain(ctx.vertices_of(path).iter()) {
            in_s[v] = true;
        }
        let sources: Vec<VertexId> = (0..inst.n).filter(|&v| in_s[v] && v != inst.t).collect();
        let options: Vec<Vec<Vec<ArcId>>> = sources.iter().map(|&v| ctx.hops(v, &in_s)).collect();
        let mut seen: FxHashSet<Vec<bool>> = FxHashSet::default();
        let mut choice = vec![0usize; sources.len()];
        loop {
            let mut in_r = vec![false; inst.m()];
            for &e in path {
                in_r[e] = true;
            }
            for (i, &c) in choice.iter().enumerate() {
                for &e in &options[i][c] {
                    in_r[e] = true;
                }
            }
            if seen.insert(in_r.clone()) {
                visited += 1;
                if visited % 1024 == 0 && opts.deadline.is_some_and(|d| Instant::now() > d) {
                    return Err(Error::Timeout);
                }
                if opts.max_guesses.is_some_and(|cap| visited > cap) {
                    return Err(Error::TooLarge(format!("more than {} guesses", visited - 1)));
                }
                if let Some(an) = ctx.analyse(path, &in_s, &in_r) {
                    stats.guesses += 1;
                    f(path, &in_s, &in_r, &an)?;
                }
            }
            // Odometer step.
            let mut i = 0;
            while i < choice.len() {
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    Ok(())
}

/// Every guess that passes the reward check; see [`Guess`].
pub fn enumerate_guesses(inst: &Instance, opts: &VcOptions) -> Result<Vec<Guess>> {
    let ctx = Ctx::new(inst, opts.cover_hint.as_deref())?;
    let mut out = Vec::new();
    let mut stats = VcStats::default();
    for_each_guess(&ctx, opts, &mut stats, |path, in_s, in_r, _| {
        out.push(Guess {
            path: path.to_vec(),
            critical_vertices: (0..inst.n).filter(|&v| in_s[v]).collect(),
            witness: (0..inst.m()).filter(|&e| in_r[e]).collect(),
        });
        Ok(())
    })?;
    Ok(out)
}

fn guess_masks(inst: &Instance, guess: &Guess) -> (Vec<bool>, Vec<bool>) {
    let mut in_s = vec![false; inst.n];
    for &v in &guess.critical_vertices {
        in_s[v] = true;
    }
    let mut in_r = vec![false; inst.m()];
    for &e in &guess.witness {
        in_r[e] = true;
    }
    (in_s, in_r)
}

/// Base arcs between vertices of `S` that any plan realizing the guess must
/// delete; `None` when one of them is a witness arc.
pub fn forced_deletions_x1(inst: &Instance, guess: &Guess) -> Result<Option<BTreeSet<ArcId>>> {
    let ctx = Ctx::new(inst, None)?;
    let (in_s, in_r) = guess_masks(inst, guess);
    Ok(ctx.analyse(&guess.path, &in_s, &in_r).map(|an| {
        an.x1.into_iter().filter(|&id| inst.arcs[id].kind == ArcKind::Base).collect()
    }))
}

/// Obstruction pairs through `v`, a vertex outside `S`: one side holds arcs
/// into `v`, the other arcs out of it.
pub fn obstruction_pairs(inst: &Instance, guess: &Guess, v: VertexId) -> Result<Option<PairSystem>> {
    let ctx = Ctx::new(inst, None)?;
    let (in_s, in_r) = guess_masks(inst, guess);
    Ok(ctx.analyse(&guess.path, &in_s, &in_r).map(|an| {
        let pairs = an.pairs[v].clone();
        PairSystem {
            side_a: pairs.iter().map(|p| p.0).collect(),
            side_b: pairs.iter().map(|p| p.1).collect(),
            pairs,
            forbidden: guess.witness.clone(),
        }
    }))
}

/// Minimum-cost plan under lexicographic semantics.
pub fn solve_vc(inst: &Instance, opts: &VcOptions) -> Result<(Option<Solution>, VcStats)> {
    let (mut sols, stats) = solve_vc_variants(inst, std::slice::from_ref(inst), opts)?;
    Ok((sols.pop().unwrap(), stats))
}

/// Solves every variant sharing `base`'s graph (see [`Instance::same_graph`])
/// over one shared guess enumeration.
pub fn solve_vc_variants(
    base: &Instance,
    variants: &[Instance],
    opts: &VcOptions,
) -> Result<(Vec<Option<Solution>>, VcStats)> {
    base.ensure_valid()?;
    if variants.iter().any(|v| !v.same_graph(base)) {
        return Err(Error::IncompatibleVariants);
    }
    let start = Instant::now();
    let ctx = Ctx::new(base, opts.cover_hint.as_deref())?;
    let mut best: Vec<Option<Solution>> = vec![None; variants.len()];
    let mut stats = VcStats::default();
    for_each_guess(&ctx, opts, &mut stats, |path, _, in_r, an| {
        for (v, var) in variants.iter().enumerate() {
            if !var.critical.iter().all(|c| path.contains(c)) {
                continue;
            }
            let budget = best[v].as_ref().map_or(usize::MAX, |s| s.cost);
            if let Some((cost, plan)) = complete(var, in_r, an, budget) {
                best[v] = Some(Solution { cost, plan });
            }
        }
        Ok(())
    })?;
    stats.wall_ms = start.elapsed().as_millis();
    Ok((best, stats))
}
