//! Minimum hitting sets for pairs across a bipartition, via forced choices,
//! maximum bipartite matching and König's construction.

use std::collections::{BTreeMap, BTreeSet};

/// Pairs `(a, b)` with `a` from one side and `b` from the other; elements of
/// `forbidden` may not be picked.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSystem {
    pub side_a: BTreeSet<usize>,
    pub side_b: BTreeSet<usize>,
    pub pairs: Vec<(usize, usize)>,
    pub forbidden: BTreeSet<usize>,
}

/// A minimum set of allowed elements meeting every pair, or `None` when some
/// pair lies entirely inside the forbidden set.
pub fn solve_pair_hitting(sys: &PairSystem) -> Option<BTreeSet<usize>> {
    let r = &sys.forbidden;
    if sys.pairs.iter().any(|(a, b)| r.contains(a) && r.contains(b)) {
        return None;
    }
    // A pair with a forbidden endpoint can only be hit by its other endpoint.
    let mut chosen = BTreeSet::new();
    for &x in r {
        for &(a, b) in &sys.pairs {
            if a == x {
                chosen.insert(b);
            } else if b == x {
                chosen.insert(a);
            }
        }
    }
    let residual: Vec<(usize, usize)> = sys
        .pairs
        .iter()
        .copied()
        .filter(|(a, b)| !chosen.contains(a) && !chosen.contains(b))
        .collect();
    let left: BTreeSet<usize> = residual.iter().map(|p| p.0).collect();
    let right: BTreeSet<usize> = residual.iter().map(|p| p.1).collect();
    let left: Vec<usize> = left.into_iter().collect();
    let right: Vec<usize> = right.into_iter().collect();
    let matching = max_bipartite_matching(&left, &right, &residual);
    let (cl, cr) = vertex_cover_from_matching(&left, &right, &residual, &matching);
    chosen.extend(cl);
    chosen.extend(cr);
    Some(chosen)
}

/// Maximum matching by repeated augmenting-path search.
pub fn max_bipartite_matching(
    left: &[usize],
    right: &[usize],
    edges: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    let adj = adjacency(left, right, edges);
    let mut match_right: Vec<Option<usize>> = vec![None; right.len()];
    for l in 0..left.len() {
        let mut seen = vec![false; right.len()];
        augment(l, &adj, &mut match_right, &mut seen);
    }
    let mut out: Vec<(usize, usize)> = match_right
        .iter()
        .enumerate()
        .filter_map(|(r, m)| m.map(|l| (left[l], right[r])))
        .collect();
    out.sort_unstable();
    out
}

fn adjacency(left: &[usize], right: &[usize], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let li: BTreeMap<usize, usize> = left.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let ri: BTreeMap<usize, usize> = right.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut adj = vec![Vec::new(); left.len()];
    for (a, b) in edges {
        adj[li[a]].push(ri[b]);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn augment(l: usize, adj: &[Vec<usize>], match_right: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &r in &adj[l] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if match_right[r].map_or(true, |l2| augment(l2, adj, match_right, seen)) {
            match_right[r] = Some(l);
            return true;
        }
    }
    false
}

/// König's construction: with `Z` the vertices reachable from unmatched left
/// vertices along alternating paths, the cover is `(left \ Z) ∪ (right ∩ Z)`.
/// `matching` must be maximum. Returns the left and right parts of the cover.
pub fn vertex_cover_from_matching(
    left: &[usize],
    right: &[usize],
    edges: &[(usize, usize)],
    matching: &[(usize, usize)],
) -> (Vec<usize>, Vec<usize>) {
    let adj = adjacency(left, right, edges);
    let li: BTreeMap<usize, usize> = left.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let ri: BTreeMap<usize, usize> = right.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut match_left: Vec<Option<usize>> = vec![None; left.len()];
    let mut match_right: Vec<Option<usize>> = vec![None; right.len()];
    for (a, b) in matching {
        match_left[li[a]] = Some(ri[b]);
        match_right[ri[b]] = Some(li[a]);
    }
    let mut z_left = vec![false; left.len()];
    let mut z_right = vec![false; right.len()];
    let mut stack: Vec<usize> = (0..left.len()).filter(|&l| match_left[l].is_none()).collect();
    for &l in &stack {
        z_left[l] = true;
    }
    while let Some(l) = stack.pop() {
        for &r in &adj[l] {
            if z_right[r] || match_left[l] == Some(r) {
                continue;
            }
            z_right[r] = true;
            if let Some(l2) = match_right[r] {
                if !z_left[l2] {
                    z_left[l2] = true;
                    stack.push(l2);
                }
            }
        }
    }
    let cover_left = (0..left.len()).filter(|&l| !z_left[l]).map(|l| left[l]).collect();
    let cover_right = (0..right.len()).filter(|&r| z_right[r]).map(|r| right[r]).collect();
    (cover_left, cover_right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn system(pairs: &[(usize, usize)], forbidden: &[usize]) -> PairSystem {
        PairSystem {
            side_a: pairs.iter().map(|p| p.0).collect(),
            side_b: pairs.iter().map(|p| p.1).collect(),
            pairs: pairs.to_vec(),
            forbidden: forbidden.iter().copied().collect(),
        }
    }

    #[test]
    fn forbidden_pair_is_infeasible() {
        assert_eq!(solve_pair_hitting(&system(&[(0, 10)], &[0, 10])), None);
    }

    #[test]
    fn forced_choices() {
        let x = solve_pair_hitting(&system(&[(0, 10), (0, 11)], &[0])).unwrap();
        assert_eq!(x, [10, 11].into());
    }

    #[test]
    fn complete_three_by_three() {
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|a| (10..13).map(move |b| (a, b))).collect();
        assert_eq!(solve_pair_hitting(&system(&pairs, &[])).unwrap().len(), 3);
        let m = max_bipartite_matching(&[0, 1, 2], &[10, 11, 12], &pairs);
        assert_eq!(m.len(), 3);
        let (l, r) = vertex_cover_from_matching(&[0, 1, 2], &[10, 11, 12], &pairs, &m);
        assert_eq!(l.len() + r.len(), 3);
    }

    #[test]
    fn shared_endpoint_and_star() {
        assert_eq!(max_bipartite_matching(&[0, 1], &[10], &[(0, 10), (1, 10)]).len(), 1);
        let star: Vec<(usize, usize)> = (10..14).map(|b| (0, b)).collect();
        let m = max_bipartite_matching(&[0], &[10, 11, 12, 13], &star);
        let (l, r) = vertex_cover_from_matching(&[0], &[10, 11, 12, 13], &star, &m);
        assert_eq!((l, r), (vec![0], vec![]));
    }

    fn brute_matching(edges: &[(usize, usize)]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << edges.len()) {
            let pick: Vec<&(usize, usize)> =
                edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e).collect();
            let ls: BTreeSet<usize> = pick.iter().map(|e| e.0).collect();
            let rs: BTreeSet<usize> = pick.iter().map(|e| e.1).collect();
            if ls.len() == pick.len() && rs.len() == pick.len() {
                best = best.max(pick.len());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matching_is_maximum(edges in proptest::collection::btree_set((0usize..5, 10usize..15), 0..12)) {
            let edges: Vec<_> = edges.into_iter().collect();
            let left: Vec<usize> = (0..5).collect();
            let right: Vec<usize> = (10..15).collect();
            let m = max_bipartite_matching(&left, &right, &edges);
            prop_assert_eq!(m.len(), brute_matching(&edges));
            let (l, r) = vertex_cover_from_matching(&left, &right, &edges, &m);
            prop_assert_eq!(l.len() + r.len(), m.len());
            for (a, b) in &edges {
                prop_assert!(l.contains(a) || r.contains(b));
            }
        }
    }
}
