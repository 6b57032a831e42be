//! Final orientation of residual undirected edges.
//!
//! The undirected subgraph of the essential-stage output is decomposed by
//! maximum cardinality search; cliques are ordered root-first along the
//! clique tree (disconnected components are linked with empty separators),
//! the clique order induces a total vertex order, and every undirected edge
//! is directed from earlier to later vertex. The induced order puts each
//! vertex after a clique of its earlier neighbors, so no new unshielded
//! collider and no cycle can appear inside a component.
//!
//! Every tie-break uses vertex indices, never the learner's configured
//! ordering: the result is a pure function of the essential graph, which is
//! what makes the stable list-based pipelines fully order-independent.

use std::collections::BTreeSet;

use crate::graph::{Mark, MixedGraph};

use super::LearnError;

/// Orient every undirected edge of `essential` according to the junction-tree
/// vertex order. Errors if the undirected subgraph is not chordal.
pub fn orient_remaining_undirected(essential: &MixedGraph) -> Result<MixedGraph, LearnError> {
    let p = essential.p();
    let und_adj: Vec<Vec<usize>> = (0..p)
        .map(|v| {
            (0..p)
                .filter(|&u| essential.edge(u, v) == Some((Mark::Tail, Mark::Tail)))
                .collect()
        })
        .collect();

    // Connected components of the undirected subgraph, skipping isolated
    // vertices; components keyed by smallest member, smallest first.
    let mut comp = vec![usize::MAX; p];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for s in 0..p {
        if comp[s] != usize::MAX || und_adj[s].is_empty() {
            continue;
        }
        let id = components.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(w) = stack.pop() {
            for &z in &und_adj[w] {
                if comp[z] == usize::MAX {
                    comp[z] = id;
                    members.push(z);
                    stack.push(z);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    // Global clique order: components in order of their smallest vertex
    // (empty separators between them), each component's cliques BFS-ordered
    // from its root.
    let mut vertex_pos = vec![usize::MAX; p];
    let mut next_pos = 0usize;
    for members in &components {
        let cliques = component_cliques(&und_adj, members)?;
        for clique in order_cliques(&cliques) {
            for &v in &clique {
                if vertex_pos[v] == usize::MAX {
                    vertex_pos[v] = next_pos;
                    next_pos += 1;
                }
            }
        }
    }

    let mut out = essential.clone();
    for u in 0..p {
        for &v in &und_adj[u] {
            if u < v {
                let (earlier, later) =
                    if vertex_pos[u] < vertex_pos[v] { (u, v) } else { (v, u) };
                out.remove_edge(earlier, later).unwrap();
                out.set_edge(earlier, later, crate::graph::EdgeKind::Directed).unwrap();
            }
        }
    }
    Ok(out)
}

/// Maximal cliques of one undirected component in MCS discovery order.
/// Fails with `NonChordal` when the perfect-elimination check does.
fn component_cliques(
    und_adj: &[Vec<usize>],
    members: &[usize],
) -> Result<Vec<Vec<usize>>, LearnError> {
    let in_comp: BTreeSet<usize> = members.iter().copied().collect();
    let mut weight: std::collections::BTreeMap<usize, usize> =
        members.iter().map(|&v| (v, 0)).collect();
    let mut numbered: BTreeSet<usize> = BTreeSet::new();
    let mut order: Vec<usize> = Vec::with_capacity(members.len());
    let mut pos = vec![usize::MAX; und_adj.len()];

    for _ in 0..members.len() {
        // Max weight, ties to the smallest vertex index.
        let (&pick, _) = weight
            .iter()
            .filter(|(v, _)| !numbered.contains(v))
            .max_by(|(va, wa), (vb, wb)| wa.cmp(wb).then(vb.cmp(va)))
            .unwrap();
        pos[pick] = order.len();
        order.push(pick);
        numbered.insert(pick);
        for &z in &und_adj[pick] {
            if in_comp.contains(&z) && !numbered.contains(&z) {
                *weight.get_mut(&z).unwrap() += 1;
            }
        }
    }

    // Earlier neighbors of each vertex in MCS order.
    let earlier = |v: usize| -> Vec<usize> {
        und_adj[v].iter().copied().filter(|&u| pos[u] < pos[v]).collect()
    };

    // Perfect-elimination certificate: the earlier neighbors minus the
    // latest of them must all be adjacent to that latest one.
    for &v in &order {
        let mut e = earlier(v);
        if e.len() <= 1 {
            continue;
        }
        e.sort_unstable_by_key(|&u| pos[u]);
        let pivot = *e.last().unwrap();
        for &u in &e[..e.len() - 1] {
            if !und_adj[pivot].contains(&u) {
                return Err(LearnError::NonChordal);
            }
        }
    }

    // Candidate cliques {v} ∪ earlier(v); keep the maximal ones, earliest
    // discovery first.
    let candidates: Vec<BTreeSet<usize>> = order
        .iter()
        .map(|&v| {
            let mut c: BTreeSet<usize> = earlier(v).into_iter().collect();
            c.insert(v);
            c
        })
        .collect();
    let mut keep = vec![true; candidates.len()];
    for i in 0..candidates.len() {
        for j in 0..candidates.len() {
            if i != j && keep[i] && candidates[i].is_subset(&candidates[j]) {
                if candidates[i] == candidates[j] {
                    if i > j {
                        keep[i] = false;
                    }
                } else {
                    keep[i] = false;
                }
            }
        }
    }
    let cliques: Vec<Vec<usize>> = candidates
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, c)| c.iter().copied().collect())
        .collect();
    Ok(cliques)
}

/// Root-first clique order: root is the clique containing the smallest
/// vertex (ties to the earliest clique), parents are the earliest preceding
/// clique containing the running-intersection separator, and cliques are
/// sorted by (distance to root, discovery index).
fn order_cliques(cliques: &[Vec<usize>]) -> Vec<Vec<usize>> {
    if cliques.len() <= 1 {
        return cliques.to_vec();
    }
    let sets: Vec<BTreeSet<usize>> = cliques.iter().map(|c| c.iter().copied().collect()).collect();
    let smallest = sets.iter().filter_map(|c| c.first().copied()).min().unwrap();
    let root = sets.iter().position(|c| c.contains(&smallest)).unwrap();

    // Tree edges from the running-intersection property over discovery order.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); sets.len()];
    for i in 1..sets.len() {
        let union_before: BTreeSet<usize> =
            sets[..i].iter().flat_map(|c| c.iter().copied()).collect();
        let separator: BTreeSet<usize> =
            sets[i].intersection(&union_before).copied().collect();
        let parent = (0..i)
            .find(|&j| separator.is_subset(&sets[j]))
            .expect("running intersection property");
        adj[i].push(parent);
        adj[parent].push(i);
    }

    // BFS distances from the chosen root.
    let mut dist = vec![usize::MAX; sets.len()];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut idx: Vec<usize> = (0..sets.len()).collect();
    idx.sort_by_key(|&i| (dist[i], i));
    idx.into_iter().map(|i| cliques[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeKind;

    #[test]
    fn no_undirected_edges_is_identity() {
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(1, 2, EdgeKind::Bidirected).unwrap();
        assert_eq!(orient_remaining_undirected(&g).unwrap(), g);
    }

    #[test]
    fn path_oriented_along_clique_order() {
        // a -- b -- c: cliques {a,b} < {b,c} give a->b, b->c.
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Undirected).unwrap();
        g.set_edge(1, 2, EdgeKind::Undirected).unwrap();
        let out = orient_remaining_undirected(&g).unwrap();
        assert_eq!(out.edge_kind(0, 1), Some(EdgeKind::Directed));
        assert_eq!(out.edge_kind(1, 2), Some(EdgeKind::Directed));
        assert!(out.unshielded_colliders().is_empty());
    }

    #[test]
    fn four_cycle_is_rejected() {
        let mut g = MixedGraph::new(vec!["a", "b", "c", "d"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Undirected).unwrap();
        g.set_edge(1, 2, EdgeKind::Undirected).unwrap();
        g.set_edge(2, 3, EdgeKind::Undirected).unwrap();
        g.set_edge(3, 0, EdgeKind::Undirected).unwrap();
        assert!(matches!(orient_remaining_undirected(&g), Err(LearnError::NonChordal)));
    }

    #[test]
    fn chordal_component_gets_acyclic_colliderless_orientation() {
        // Two triangles sharing an edge plus a separate path.
        let mut g = MixedGraph::new(vec!["a", "b", "c", "d", "e", "f"]).unwrap();
        for (u, v) in [(0, 1), (1, 2), (0, 2), (1, 3), (2, 3)] {
            g.set_edge(u, v, EdgeKind::Undirected).unwrap();
        }
        g.set_edge(4, 5, EdgeKind::Undirected).unwrap();
        let out = orient_remaining_undirected(&g).unwrap();
        assert!(out.edges().iter().all(|&(_, _, k)| k == EdgeKind::Directed));
        assert!(!out.has_partially_directed_cycle());
        assert!(out.unshielded_colliders().is_empty());
    }

    #[test]
    fn mixed_graph_keeps_oriented_part() {
        // Residual undirected edges around an existing v-structure whose
        // flanks are shielded by the undirected edges.
        let mut g = MixedGraph::new(vec!["a", "b", "c", "d"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(2, 1, EdgeKind::Directed).unwrap();
        g.set_edge(0, 3, EdgeKind::Undirected).unwrap();
        g.set_edge(2, 3, EdgeKind::Undirected).unwrap();
        let before = g.unshielded_colliders();
        let out = orient_remaining_undirected(&g).unwrap();
        assert_eq!(out.edge_kind(0, 1), Some(EdgeKind::Directed));
        assert_eq!(out.edge_kind(2, 1), Some(EdgeKind::Directed));
        assert!(!out.has_partially_directed_cycle());
        assert_eq!(out.unshielded_colliders(), before);
    }
}
