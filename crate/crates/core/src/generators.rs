//! Instance factories: the worked example, chains, seeded random DAGs, the
//! k-sum reduction and the exhaustive small-graph family.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Arc, ArcId, ArcKind, Instance, VertexId};
use crate::oracle::is_tie_free;
use crate::rational::Rational;

fn make_arc(id: ArcId, tail: VertexId, head: VertexId, w: Rational, kind: ArcKind) -> Arc {
    Arc { id, tail, head, weight: w, kind, rank: id }
}

/// The eight-vertex worked example. Vertices `s,a,b,c,d,e,f,t` are `0..8`;
/// base arcs are ids `0..10`, the addable arc `(a,b)` is id 10 and the
/// critical arc `(b,e)` is id 4.
pub fn fixture_fig1() -> Instance {
    let (s, a, b, c, d, e, f, t) = (0, 1, 2, 3, 4, 5, 6, 7);
    let base = [
        (s, a, 10),
        (s, b, 10),
        (s, c, 10),
        (a, d, 8),
        (b, e, 10),
        (b, f, 2),
        (c, f, 10),
        (d, t, 8),
        (e, t, 10),
        (f, t, 10),
    ];
    let mut arcs: Vec<Arc> = base
        .iter()
        .enumerate()
        .map(|(i, &(x, y, w))| make_arc(i, x, y, w.into(), ArcKind::Base))
        .collect();
    arcs.push(make_arc(10, a, b, 1.into(), ArcKind::Addable));
    Instance {
        n: 8,
        arcs,
        s,
        t,
        beta: Rational::new(1, 2),
        r: 36.into(),
        critical: [4].into(),
    }
}

/// A path `0 -> 1 -> ... -> p` of `p` arcs, each of weight `w`.
pub fn chain(p: usize, w: i64) -> Instance {
    let arcs = (0..p).map(|i| make_arc(i, i, i + 1, w.into(), ArcKind::Base)).collect();
    Instance {
        n: p + 1,
        arcs,
        s: 0,
        t: p,
        beta: Rational::new(1, 2),
        r: (2 * w * p as i64 + 2).into(),
        critical: BTreeSet::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomParams {
    pub seed: u64,
    pub n: usize,
    /// Arc count aimed for; the connectivity backbone may exceed it.
    pub target_arcs: usize,
    /// Inclusive integer weight range.
    pub weight_range: (i64, i64),
    pub addable: usize,
    pub critical: usize,
    pub beta: Rational,
    /// `None` draws an integer reward around the heaviest s-t path cost.
    pub r: Option<Rational>,
    /// Re-draw weights until no view of G+A has a perceived-cost tie.
    pub tie_free: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            seed: 0,
            n: 6,
            target_arcs: 10,
            weight_range: (0, 9),
            addable: 2,
            critical: 1,
            beta: Rational::new(1, 2),
            r: None,
            tie_free: false,
        }
    }
}

const TIE_FREE_ATTEMPTS: usize = 2_000;

/// Seeded random DAG in which every vertex lies on an s-t path of G+A.
pub fn gen_random(params: &RandomParams) -> Result<Instance> {
    if params.n < 2 {
        return Err(Error::Generation("need at least two vertices".into()));
    }
    if params.weight_range.0 < 0 || params.weight_range.0 > params.weight_range.1 {
        return Err(Error::Generation("bad weight range".into()));
    }
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    // label[i] is the vertex at topological position i.
    let mut label: Vec<VertexId> = (0..n).collect();
    label.shuffle(&mut rng);

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    if n == 2 {
        pairs.insert((0, 1));
    }
    for i in 1..n - 1 {
        if !pairs.iter().any(|&(_, y)| y == i) {
            pairs.insert((rng.gen_range(0..i), i));
        }
    }
    for i in (1..n - 1).rev() {
        if !pairs.iter().any(|&(x, _)| x == i) {
            pairs.insert((i, rng.gen_range(i + 1..n)));
        }
    }
    let all_pairs = n * (n - 1) / 2;
    while pairs.len() < params.target_arcs.min(all_pairs) {
        let x = rng.gen_range(0..n - 1);
        let y = rng.gen_range(x + 1..n);
        pairs.insert((x, y));
    }
    let mut order: Vec<(usize, usize)> = pairs.into_iter().collect();
    order.shuffle(&mut rng);

    let m = order.len();
    let (lo, hi) = params.weight_range;
    let mut ids: Vec<ArcId> = (0..m).collect();
    ids.shuffle(&mut rng);
    let addable: BTreeSet<ArcId> = ids.iter().take(params.addable.min(m)).copied().collect();

    let mut arcs: Vec<Arc> = order
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| {
            let kind = if addable.contains(&id) { ArcKind::Addable } else { ArcKind::Base };
            make_arc(id, label[x], label[y], rng.gen_range(lo..=hi).into(), kind)
        })
        .collect();

    // Critical arcs: base arcs of a random s-t path of G+A.
    let (s, t) = (label[0], label[n - 1]);
    let mut v = s;
    let mut on_path = Vec::new();
    while v != t {
        let outs: Vec<&Arc> = arcs.iter().filter(|a| a.tail == v).collect();
        let a = outs[rng.gen_range(0..outs.len())];
        if a.kind == ArcKind::Base {
            on_path.push(a.id);
        }
        v = a.head;
    }
    on_path.shuffle(&mut rng);
    let critical: BTreeSet<ArcId> = on_path.into_iter().take(params.critical).collect();

    let mut inst = Instance { n, arcs: Vec::new(), s, t, beta: params.beta, r: 0.into(), critical };
    for attempt in 0.. {
        inst.arcs.clone_from(&arcs);
        inst.r = match params.r {
            Some(r) => r,
            None => {
                let heaviest = heaviest_path(&inst).numer().max(1);
                rng.gen_range(heaviest / 2 + 1..=2 * heaviest).into()
            }
        };
        if !params.tie_free || is_tie_free(&inst) {
            break;
        }
        if attempt == TIE_FREE_ATTEMPTS {
            return Err(Error::Generation(format!(
                "no tie-free weighting after {TIE_FREE_ATTEMPTS} draws"
            )));
        }
        for a in &mut arcs {
            a.weight = rng.gen_range(lo..=hi).into();
        }
    }
    Ok(inst)
}

fn heaviest_path(inst: &Instance) -> Rational {
    let order = inst.topological_order().expect("acyclic instance");
    let mut best = vec![None::<Rational>; inst.n];
    best[inst.t] = Some(Rational::ZERO);
    for &u in order.iter().rev() {
        for a in inst.arcs.iter().filter(|a| a.tail == u) {
            if let Some(d) = best[a.head] {
                let c = a.weight + d;
                if best[u].map_or(true, |b| c > b) {
                    best[u] = Some(c);
                }
            }
        }
    }
    best[inst.s].unwrap_or(Rational::ZERO)
}

/// Input of the Modified k-Sum problem: pick one value from each set so that
/// the picks sum to `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MksInput {
    pub sets: Vec<Vec<i64>>,
    pub target: i64,
    pub epsilon: Rational,
}

impl MksInput {
    pub fn is_yes(&self) -> bool {
        let mut reachable: BTreeSet<i64> = [0].into();
        for set in &self.sets {
            reachable = reachable
                .iter()
                .flat_map(|&acc| set.iter().map(move |&x| acc + x))
                .filter(|&v| v <= self.target)
                .collect();
        }
        reachable.contains(&self.target)
    }

    pub fn z(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone)]
pub struct MksInstance {
    pub instance: Instance,
    pub z: usize,
    /// Edit budget that is achievable iff the k-sum input is a yes-instance.
    pub budget: usize,
    /// Ids of the `(s,c)` and `(c,t)` copies forming the bypass.
    pub bypass_in: Vec<ArcId>,
    pub bypass_out: Vec<ArcId>,
    /// Gadget arcs per level.
    pub gadget: Vec<Vec<ArcId>>,
}

impl MksInstance {
    /// Whether a plan cuts every `s -> c -> t` route.
    pub fn breaks_bypass(&self, deletions: &BTreeSet<ArcId>) -> bool {
        self.bypass_in.iter().all(|a| deletions.contains(a))
            || self.bypass_out.iter().all(|a| deletions.contains(a))
    }
}

/// Builds the reduction instance.
///
/// Vertices: `s=0, a=1, b=2, c=3, t=4` and `v_1..v_k = 5..5+k`, with
/// `v_{k+1} = t`. Frame weights: `(s,a)=0`, `(a,v_1)=1`, `(a,b)=0`,
/// `(b,t)=S+3` (critical), `z` copies of `(s,c)=0` and of `(c,t)=S+2-eps`;
/// level `i` has one arc `v_i -> v_{i+1}` of weight `x` per `x` in `X_i`.
/// `beta = 1/4 + eps`, `r = 10 S`.
///
/// With one gadget arc kept per level summing to `S'`, the agent at `a`
/// turns to `b` iff `S' >= S`, and at `s` prefers `a` over the bypass iff
/// `S' <= S`. Both comparisons are strict only when `3 beta < 1`, and
/// `(b,t)` survives the reward check only when `S + 3 <= 10 S beta`.
pub fn gen_mks(input: &MksInput) -> Result<MksInstance> {
    let k = input.sets.len();
    if k == 0 || input.sets.iter().any(Vec::is_empty) {
        return Err(Error::Generation("need k >= 1 nonempty sets".into()));
    }
    if input.sets.iter().flatten().any(|&x| x <= 0) || input.target <= 0 {
        return Err(Error::Generation("set elements and target must be positive".into()));
    }
    let eps = input.epsilon;
    let s_val = input.target;
    let beta = Rational::new(1, 4) + eps;
    let r = Rational::from_integer(10 * s_val);
    let bt = Rational::from_integer(s_val + 3);
    let ct = Rational::from_integer(s_val + 2) - eps;

    let fail = |what: &str| Err(Error::CalibrationFailure(what.to_owned()));
    if !(eps > Rational::ZERO && eps < Rational::ONE) {
        return fail("epsilon must lie in (0, 1)");
    }
    // At a, the gadget with S' = S must lose to b strictly: 1 + beta*S > beta*(S+3).
    if Rational::ONE + beta * s_val.into() <= beta * bt {
        return fail("3*beta >= 1: the gadget is not strictly worse at a when S' = S (need eps < 1/12)");
    }
    // At a, the gadget with S' = S - 1 must win strictly: 1 + beta*(S-1) < beta*(S+3).
    if Rational::ONE + beta * (s_val - 1).into() >= beta * bt {
        return fail("beta <= 1/4: the gadget never attracts the agent");
    }
    // At s, going to a with dist(a) = S + 1 must beat the bypass strictly,
    // while dist(a) = S + 2 must lose.
    if !(Rational::from_integer(s_val + 1) < ct && Rational::from_integer(s_val + 2) > ct) {
        return fail("bypass weight does not separate S+1 from S+2");
    }
    // b -> t must not be abandoned.
    if bt > beta * r {
        return fail("S + 3 exceeds beta * r: the agent abandons at b (need S >= 2)");
    }

    let (s, a, b, c, t) = (0, 1, 2, 3, 4);
    let level = |i: usize| if i == k { t } else { 5 + i };
    let mut arcs = Vec::new();
    let mut push = |x: VertexId, y: VertexId, w: Rational| {
        let id = arcs.len();
        arcs.push(make_arc(id, x, y, w, ArcKind::Base));
        id
    };
    push(s, a, 0.into());
    push(a, level(0), 1.into());
    push(a, b, 0.into());
    let critical = push(b, t, bt);
    let z = input.z();
    let bypass_in: Vec<ArcId> = (0..z).map(|_| push(s, c, 0.into())).collect();
    let bypass_out: Vec<ArcId> = (0..z).map(|_| push(c, t, ct)).collect();
    let gadget: Vec<Vec<ArcId>> = input
        .sets
        .iter()
        .enumerate()
        .map(|(i, set)| set.iter().map(|&x| push(level(i), level(i + 1), x.into())).collect())
        .collect();
    let instance = Instance {
        n: 5 + k,
        arcs,
        s,
        t,
        beta,
        r,
        critical: [critical].into(),
    };
    Ok(MksInstance { instance, z, budget: z - k, bypass_in, bypass_out, gadget })
}

/// Arc lists `(tail, head)` of every simple DAG on `0..n` with arcs `i < j`,
/// `1..=max_arcs` arcs, every vertex on a `0 -> n-1` path, one representative
/// per isomorphism class (internal vertices relabelled, arcs kept forward).
pub fn small_structures(n: usize, max_arcs: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 2);
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let internal: Vec<usize> = (1..n - 1).collect();
    let perms = permutations(&internal);
    let mut out = Vec::new();
    for mask in 1u32..(1 << pairs.len()) {
        if mask.count_ones() as usize > max_arcs {
            continue;
        }
        let arcs: Vec<(usize, usize)> =
            (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if !every_vertex_on_path(n, &arcs) {
            continue;
        }
        let canonical = perms
            .iter()
            .filter_map(|p| {
                let map = |v: usize| if v == 0 || v == n - 1 { v } else { p[v - 1] };
                let mut mapped: Vec<(usize, usize)> =
                    arcs.iter().map(|&(x, y)| (map(x), map(y))).collect();
                mapped.iter().all(|&(x, y)| x < y).then(|| {
                    mapped.sort_unstable();
                    mapped
                })
            })
            .min()
            .expect("identity permutation keeps arcs forward");
        if canonical == arcs {
            out.push(arcs);
        }
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn every_vertex_on_path(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut from_s = vec![false; n];
    from_s[0] = true;
    for &(x, y) in arcs {
        // Arcs are sorted by tail, and tails precede heads.
        if from_s[x] {
            from_s[y] = true;
        }
    }
    let mut to_t = vec![false; n];
    to_t[n - 1] = true;
    for &(x, y) in arcs.iter().rev() {
        if to_t[y] {
            to_t[x] = true;
        }
    }
    (0..n).all(|v| from_s[v] && to_t[v])
}

/// Instance over a small structure with all arcs base and no critical arcs.
pub fn structure_instance(
    n: usize,
    arcs: &[(usize, usize)],
    weights: &[i64],
    beta: Rational,
    r: Rational,
) -> Instance {
    Instance {
        n,
        arcs: arcs
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(id, (&(x, y), &w))| make_arc(id, x, y, w.into(), ArcKind::Base))
            .collect(),
        s: 0,
        t: n - 1,
        beta,
        r,
        critical: BTreeSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::to_json;

    #[test]
    fn random_is_deterministic_and_valid() {
        for seed in 0..1000 {
            let p = RandomParams { seed, ..RandomParams::default() };
            let inst = gen_random(&p).unwrap();
            assert_eq!(inst.validate(), vec![], "seed {seed}");
            assert_eq!(inst.normalize().unwrap().instance, inst, "seed {seed}");
            if seed < 20 {
                assert_eq!(to_json(&gen_random(&p).unwrap()), to_json(&inst));
            }
        }
    }

    #[test]
    fn tie_free_mode() {
        use crate::sim::{simulate_all, DEFAULT_BRANCH_CAP};
        for seed in 0..20 {
            let p = RandomParams { seed, tie_free: true, weight_range: (0, 20), ..RandomParams::default() };
            let inst = gen_random(&p).unwrap();
            assert!(is_tie_free(&inst));
            assert_eq!(simulate_all(&inst.base_view(), DEFAULT_BRANCH_CAP).unwrap().len(), 1);
        }
    }

    #[test]
    fn mks_shape() {
        let input = MksInput { sets: vec![vec![1, 2], vec![3, 5]], target: 5, epsilon: Rational::new(1, 100) };
        let g = gen_mks(&input).unwrap();
        assert_eq!((g.z, g.budget), (4, 2));
        assert_eq!(g.instance.n, 7);
        assert_eq!(g.instance.m(), 4 + 8 + 4);
        assert_eq!(g.instance.validate(), vec![]);
        assert!(input.is_yes());
        assert!(!MksInput { sets: vec![vec![1], vec![1]], ..input.clone() }.is_yes());
    }

    #[test]
    fn mks_calibration_failures() {
        let mut input = MksInput { sets: vec![vec![1]], target: 5, epsilon: Rational::new(1, 12) };
        assert!(matches!(gen_mks(&input), Err(Error::CalibrationFailure(_))));
        input.epsilon = Rational::new(1, 100);
        input.target = 1;
        assert!(matches!(gen_mks(&input), Err(Error::CalibrationFailure(_))));
        input.target = 2;
        assert!(gen_mks(&input).is_ok());
    }

    #[test]
    fn structure_counts() {
        assert_eq!(small_structures(2, 7), vec![vec![(0, 1)]]);
        assert_eq!(small_structures(3, 7).len(), 2);
        for n in 2..=5 {
            for arcs in small_structures(n, 7) {
                assert!(every_vertex_on_path(n, &arcs));
            }
        }
    }
}
