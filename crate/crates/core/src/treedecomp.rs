//! Tree decompositions of the undirected skeleton of G+A and their nice form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{ArcId, Instance, VertexId};

/// An ordinary tree decomposition: bags and a parent pointer per bag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<VertexId>>,
    pub parent: Vec<Option<usize>>,
    pub width: usize,
}

/// Undirected simple skeleton of G+A as sorted vertex pairs.
pub fn skeleton(inst: &Instance) -> Vec<(VertexId, VertexId)> {
    let set: BTreeSet<(VertexId, VertexId)> = inst
        .arcs
        .iter()
        .map(|a| (a.tail.min(a.head), a.tail.max(a.head)))
        .collect();
    set.into_iter().collect()
}

/// Min-fill elimination (ties: fewer neighbours, then smaller id).
pub fn heuristic_decomposition(n: usize, edges: &[(VertexId, VertexId)]) -> TreeDecomposition {
    let mut adj: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); n];
    for &(x, y) in edges {
        if x != y {
            adj[x].insert(y);
            adj[y].insert(x);
        }
    }
    let mut alive = vec![true; n];
    let mut position = vec![usize::MAX; n];
    let mut bags = Vec::with_capacity(n);
    let mut owner = Vec::with_capacity(n);
    for step in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| {
                let nb: Vec<VertexId> = adj[v].iter().copied().collect();
                let mut fill = 0usize;
                for i in 0..nb.len() {
                    for j in i + 1..nb.len() {
                        if !adj[nb[i]].contains(&nb[j]) {
                            fill += 1;
                        }
                    }
                }
                (fill, nb.len(), v)
            })
            .expect("a live vertex remains");
        let nb: Vec<VertexId> = adj[v].iter().copied().collect();
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                adj[nb[i]].insert(nb[j]);
                adj[nb[j]].insert(nb[i]);
            }
        }
        for &u in &nb {
            adj[u].remove(&v);
        }
        alive[v] = false;
        position[v] = step;
        let mut bag = nb.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        owner.push((v, nb));
    }
    // The bag of v hangs below the bag of its first-eliminated later neighbour.
    let mut parent: Vec<Option<usize>> = owner
        .iter()
        .map(|(_, nb)| nb.iter().map(|&u| position[u]).min())
        .collect();
    // Link the roots of a forest into one tree.
    let roots: Vec<usize> = (0..parent.len()).filter(|&i| parent[i].is_none()).collect();
    for w in roots.windows(2) {
        parent[w[0]] = Some(w[1]);
    }
    let width = bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1);
    TreeDecomposition { bags, parent, width }
}

/// Checks vertex coverage, edge coverage and the connected-subtree property.
pub fn validate_decomposition(
    td: &TreeDecomposition,
    n: usize,
    edges: &[(VertexId, VertexId)],
) -> Vec<String> {
    let mut out = Vec::new();
    let k = td.bags.len();
    let mut children = vec![Vec::new(); k];
    let mut roots = 0;
    for (i, p) in td.parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => roots += 1,
        }
    }
    if k > 0 && roots != 1 {
        out.push(format!("{roots} roots"));
    }
    for v in 0..n {
        let holders: Vec<usize> = (0..k).filter(|&i| td.bags[i].contains(&v)).collect();
        if holders.is_empty() {
            out.push(format!("vertex {v} in no bag"));
            continue;
        }
        // Connected iff exactly one holder has its parent outside the holders.
        let tops = holders
            .iter()
            .filter(|&&i| td.parent[i].map_or(true, |p| !td.bags[p].contains(&v)))
            .count();
        if tops != 1 {
            out.push(format!("bags holding vertex {v} are disconnected"));
        }
    }
    for &(x, y) in edges {
        if !td.bags.iter().any(|b| b.contains(&x) && b.contains(&y)) {
            out.push(format!("edge {x}-{y} in no bag"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "of", rename_all = "snake_case")]
pub enum NodeKind {
    Leaf,
    IntroduceVertex(VertexId),
    IntroduceEdge(ArcId),
    Forget(VertexId),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NiceNode {
    pub id: usize,
    pub kind: NodeKind,
    /// Sorted.
    pub bag: Vec<VertexId>,
    pub children: Vec<usize>,
}

/// Nice decomposition with s and t in every bag. Children precede parents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
    pub width: usize,
}

impl NiceTreeDecomposition {
    pub fn count(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }
}

struct Builder {
    nodes: Vec<NiceNode>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, bag: Vec<VertexId>, children: Vec<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(NiceNode { id, kind, bag, children });
        id
    }

    fn bag(&self, id: usize) -> &[VertexId] {
        &self.nodes[id].bag
    }

    /// Forgets and introduces vertices one at a time until the bag is `target`.
    fn morph(&mut self, mut id: usize, target: &BTreeSet<VertexId>) -> usize {
        let current: Vec<VertexId> = self.bag(id).to_vec();
        for v in current.iter().filter(|v| !target.contains(v)) {
            let bag: Vec<VertexId> = self.bag(id).iter().copied().filter(|u| u != v).collect();
            id = self.push(NodeKind::Forget(*v), bag, vec![id]);
        }
        for &v in target {
            if !self.bag(id).contains(&v) {
                let mut bag = self.bag(id).to_vec();
                bag.push(v);
                bag.sort_unstable();
                id = self.push(NodeKind::IntroduceVertex(v), bag, vec![id]);
            }
        }
        id
    }
}

/// Nice form of `td` for `inst`; `td` may omit s and t, which are pinned into
/// every bag. Each arc is introduced at the highest bag holding both ends.
pub fn to_nice(td: &TreeDecomposition, inst: &Instance) -> NiceTreeDecomposition {
    let pinned: BTreeSet<VertexId> = [inst.s, inst.t].into();
    let k = td.bags.len();
    let full: Vec<BTreeSet<VertexId>> = td
        .bags
        .iter()
        .map(|b| b.iter().copied().chain(pinned.iter().copied()).collect())
        .collect();
    let mut children = vec![Vec::new(); k];
    let mut root = None;
    for (i, p) in td.parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => root = Some(i),
        }
    }
    let mut depth = vec![usize::MAX; k];
    let mut order = Vec::with_capacity(k);
    if let Some(r) = root {
        depth[r] = 0;
        let mut stack = vec![r];
        while let Some(i) = stack.pop() {
            order.push(i);
            for &c in &children[i] {
                depth[c] = depth[i] + 1;
                stack.push(c);
            }
        }
    }
    let mut assigned: Vec<Vec<ArcId>> = vec![Vec::new(); k];
    for a in inst.arcs.iter().filter(|_| root.is_some()) {
        let home = order
            .iter()
            .copied()
            .filter(|&i| full[i].contains(&a.tail) && full[i].contains(&a.head))
            .min_by_key(|&i| depth[i])
            .expect("decomposition covers every arc");
        assigned[home].push(a.id);
    }

    let mut b = Builder { nodes: Vec::new() };
    let leaf_bag: Vec<VertexId> = pinned.iter().copied().collect();
    let mut built: Vec<Option<usize>> = vec![None; k];
    for &i in order.iter().rev() {
        let mut subs: Vec<usize> = children[i]
            .iter()
            .map(|&c| {
                let id = built[c].expect("children built first");
                b.morph(id, &full[i])
            })
            .collect();
        if subs.is_empty() {
            let leaf = b.push(NodeKind::Leaf, leaf_bag.clone(), vec![]);
            subs.push(b.morph(leaf, &full[i]));
        }
        let mut top = subs[0];
        for &other in &subs[1..] {
            let bag = b.bag(top).to_vec();
            top = b.push(NodeKind::Join, bag, vec![top, other]);
        }
        for &a in &assigned[i] {
            let bag = b.bag(top).to_vec();
            top = b.push(NodeKind::IntroduceEdge(a), bag, vec![top]);
        }
        built[i] = Some(top);
    }
    let root_id = match root {
        Some(r) => {
            let top = built[r].unwrap();
            b.morph(top, &pinned)
        }
        None => {
            let mut top = b.push(NodeKind::Leaf, leaf_bag, vec![]);
            for a in &inst.arcs {
                let bag = b.bag(top).to_vec();
                top = b.push(NodeKind::IntroduceEdge(a.id), bag, vec![top]);
            }
            top
        }
    };
    let width = b.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(1) - 1;
    NiceTreeDecomposition { nodes: b.nodes, root: root_id, width }
}

/// Heuristic decomposition of the skeleton with s and t removed, in nice form.
pub fn decompose(inst: &Instance) -> NiceTreeDecomposition {
    let edges: Vec<(VertexId, VertexId)> = skeleton(inst)
        .into_iter()
        .filter(|&(x, y)| ![inst.s, inst.t].contains(&x) && ![inst.s, inst.t].contains(&y))
        .collect();
    // Relabel so s and t do not appear at all.
    let keep: Vec<VertexId> = (0..inst.n).filter(|&v| v != inst.s && v != inst.t).collect();
    let index: BTreeMap<VertexId, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let local: Vec<(usize, usize)> = edges.iter().map(|(x, y)| (index[x], index[y])).collect();
    let mut td = heuristic_decomposition(keep.len(), &local);
    for bag in &mut td.bags {
        for v in bag.iter_mut() {
            *v = keep[*v];
        }
        bag.sort_unstable();
    }
    to_nice(&td, inst)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NiceViolation {
    RootBag,
    LeafBag(usize),
    PinnedMissing(usize),
    ChildOrder(usize),
    BadArity(usize),
    BadTransition(usize),
    IntroducedVertexHasArcs(usize),
    EndpointNotInBag(usize),
    ArcNotIntroduced(ArcId),
    ArcIntroducedTwice(ArcId),
    JoinNotPartition(usize),
    Disconnected(VertexId),
    NotATree,
}

impl fmt::Display for NiceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NiceViolation::RootBag => write!(f, "root bag is not {{s,t}}"),
            NiceViolation::LeafBag(i) => write!(f, "leaf {i} bag is not {{s,t}}"),
            NiceViolation::PinnedMissing(i) => write!(f, "node {i} lacks s or t"),
            NiceViolation::ChildOrder(i) => write!(f, "node {i} has a child stored after it"),
            NiceViolation::BadArity(i) => write!(f, "node {i} has the wrong number of children"),
            NiceViolation::BadTransition(i) => write!(f, "node {i} bag does not match its kind"),
            NiceViolation::IntroducedVertexHasArcs(i) => {
                write!(f, "node {i} introduces a vertex that already has arcs")
            }
            NiceViolation::EndpointNotInBag(i) => write!(f, "node {i} introduces an arc outside its bag"),
            NiceViolation::ArcNotIntroduced(a) => write!(f, "arc {a} is never introduced"),
            NiceViolation::ArcIntroducedTwice(a) => write!(f, "arc {a} is introduced twice"),
            NiceViolation::JoinNotPartition(i) => write!(f, "join {i} children share arcs"),
            NiceViolation::Disconnected(v) => write!(f, "bags holding vertex {v} are disconnected"),
            NiceViolation::NotATree => write!(f, "nodes do not form a single rooted tree"),
        }
    }
}

pub fn validate_nice(ntd: &NiceTreeDecomposition, inst: &Instance) -> Vec<NiceViolation> {
    use NiceViolation as V;
    let mut out = Vec::new();
    let nodes = &ntd.nodes;
    let pinned = {
        let mut p = vec![inst.s, inst.t];
        p.sort_unstable();
        p
    };
    let mut parent: Vec<Option<usize>> = vec![None; nodes.len()];
    let mut tree_ok = ntd.root < nodes.len();
    for (i, node) in nodes.iter().enumerate() {
        for &c in &node.children {
            if c >= i {
                out.push(V::ChildOrder(i));
                tree_ok = false;
            } else if parent[c].replace(i).is_some() {
                tree_ok = false;
            }
        }
    }
    let parentless = (0..nodes.len()).filter(|&i| parent[i].is_none()).count();
    if !tree_ok || parentless != 1 || parent.get(ntd.root).copied().flatten().is_some() {
        out.push(V::NotATree);
        return out;
    }
    if nodes[ntd.root].bag != pinned {
        out.push(V::RootBag);
    }
    // Arcs introduced in each subtree, bottom-up (children precede parents).
    let mut below: Vec<BTreeSet<ArcId>> = vec![BTreeSet::new(); nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        if !pinned.iter().all(|p| node.bag.contains(p)) {
            out.push(V::PinnedMissing(i));
        }
        let arity = node.children.len();
        let child_bag = |j: usize| &nodes[node.children[j]].bag;
        let without = |bag: &[VertexId], v: VertexId| -> Vec<VertexId> {
            bag.iter().copied().filter(|&u| u != v).collect()
        };
        let mut arcs: BTreeSet<ArcId> = BTreeSet::new();
        for &c in &node.children {
            arcs.extend(below[c].iter().copied());
        }
        match node.kind {
            NodeKind::Leaf => {
                if arity != 0 {
                    out.push(V::BadArity(i));
                }
                if node.bag != pinned {
                    out.push(V::LeafBag(i));
                }
            }
            NodeKind::IntroduceVertex(v) | NodeKind::Forget(v) => {
                if arity != 1 {
                    out.push(V::BadArity(i));
                    continue;
                }
                let (big, small) = match node.kind {
                    NodeKind::IntroduceVertex(_) => (&node.bag, child_bag(0)),
                    _ => (child_bag(0), &node.bag),
                };
                if pinned.contains(&v) || !big.contains(&v) || without(big, v) != *small {
                    out.push(V::BadTransition(i));
                }
                if matches!(node.kind, NodeKind::IntroduceVertex(_))
                    && arcs.iter().any(|&a| inst.arcs[a].tail == v || inst.arcs[a].head == v)
                {
                    out.push(V::IntroducedVertexHasArcs(i));
                }
            }
            NodeKind::IntroduceEdge(a) => {
                if arity != 1 {
                    out.push(V::BadArity(i));
                    continue;
                }
                if *child_bag(0) != node.bag {
                    out.push(V::BadTransition(i));
                }
                match inst.arcs.get(a) {
                    Some(arc) if node.bag.contains(&arc.tail) && node.bag.contains(&arc.head) => {}
                    _ => out.push(V::EndpointNotInBag(i)),
                }
                if !arcs.insert(a) {
                    out.push(V::ArcIntroducedTwice(a));
                }
            }
            NodeKind::Join => {
                if arity != 2 {
                    out.push(V::BadArity(i));
                    continue;
                }
                if *child_bag(0) != node.bag || *child_bag(1) != node.bag {
                    out.push(V::BadTransition(i));
                }
                if !below[node.children[0]].is_disjoint(&below[node.children[1]]) {
                    out.push(V::JoinNotPartition(i));
                }
            }
        }
        below[i] = arcs;
    }
    let introduced: Vec<ArcId> = nodes
        .iter()
        .filter_map(|n| match n.kind {
            NodeKind::IntroduceEdge(a) => Some(a),
            _ => None,
        })
        .collect();
    for a in 0..inst.m() {
        match introduced.iter().filter(|&&x| x == a).count() {
            0 => out.push(V::ArcNotIntroduced(a)),
            1 => {}
            _ => {
                if !out.contains(&V::ArcIntroducedTwice(a)) {
                    out.push(V::ArcIntroducedTwice(a));
                }
            }
        }
    }
    for v in 0..inst.n {
        let holders: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].bag.contains(&v)).collect();
        let tops = holders
            .iter()
            .filter(|&&i| parent[i].map_or(true, |p| !nodes[p].bag.contains(&v)))
            .count();
        if tops > 1 {
            out.push(V::Disconnected(v));
        }
    }
    out
}
