//! Orientation rules applied after v-structure recovery.
//!
//! R1: a*->b -- c with a, c nonadjacent orients b -> c.
//! R2: a -> b -> c with a -- c orients a -> c.
//! R3: a*->b<-*c with a, c nonadjacent and a -- d -- c, d -- b orients d -> b.
//!
//! `*->` means an arrowhead at the written head with any mark at the tail.
//! In conservative/majority modes a rule is withheld when an unshielded
//! triple of its pattern is marked ambiguous.
//!
//! Sequential application re-scans from R1 after every single orientation,
//! so the outcome depends on the vertex ordering. List application gathers
//! all matches of a rule against one snapshot and applies them together,
//! merging conflicting arrowheads into bidirected edges; its outcome is a
//! function of the graph alone.

use std::collections::BTreeSet;

use crate::graph::{Mark, MixedGraph};

type Triple = (usize, usize, usize);

fn canonical(x: usize, mid: usize, y: usize) -> Triple {
    (x.min(y), mid, x.max(y))
}

fn arrow_into(g: &MixedGraph, tail: usize, head: usize) -> bool {
    g.mark_at(tail, head) == Some(Mark::Arrow)
}

fn undirected(g: &MixedGraph, a: usize, b: usize) -> bool {
    g.edge(a, b) == Some((Mark::Tail, Mark::Tail))
}

fn directed(g: &MixedGraph, tail: usize, head: usize) -> bool {
    g.edge(tail, head) == Some((Mark::Tail, Mark::Arrow))
}

/// One orientation step: add an arrowhead at `head` on the edge
/// `{tail, head}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Orient {
    tail: usize,
    head: usize,
}

fn r1_matches(
    g: &MixedGraph,
    ambiguous: &BTreeSet<Triple>,
    order: &[usize],
    first_only: bool,
) -> Vec<Orient> {
    let mut out = Vec::new();
    for &a in order {
        for &b in order {
            if b == a || !arrow_into(g, a, b) {
                continue;
            }
            for &c in order {
                if c == a || c == b || !undirected(g, b, c) || g.has_edge(a, c) {
                    continue;
                }
                if ambiguous.contains(&canonical(a, b, c)) {
                    continue;
                }
                out.push(Orient { tail: b, head: c });
                if first_only {
                    return out;
                }
            }
        }
    }
    out
}

fn r2_matches(g: &MixedGraph, order: &[usize], first_only: bool) -> Vec<Orient> {
    let mut out = Vec::new();
    for &a in order {
        for &b in order {
            if b == a || !directed(g, a, b) {
                continue;
            }
            for &c in order {
                if c == a || c == b || !directed(g, b, c) || !undirected(g, a, c) {
                    continue;
                }
                out.push(Orient { tail: a, head: c });
                if first_only {
                    return out;
                }
            }
        }
    }
    out
}

fn r3_matches(
    g: &MixedGraph,
    ambiguous: &BTreeSet<Triple>,
    order: &[usize],
    first_only: bool,
) -> Vec<Orient> {
    let mut out = Vec::new();
    for &a in order {
        for &b in order {
            if b == a || !arrow_into(g, a, b) {
                continue;
            }
            for &c in order {
                if c == a || c == b || !arrow_into(g, c, b) || g.has_edge(a, c) {
                    continue;
                }
                if ambiguous.contains(&canonical(a, b, c)) {
                    continue;
                }
                for &d in order {
                    if d == a
                        || d == b
                        || d == c
                        || !undirected(g, d, b)
                        || !undirected(g, a, d)
                        || !undirected(g, c, d)
                    {
                        continue;
                    }
                    if ambiguous.contains(&canonical(a, d, c)) {
                        continue;
                    }
                    out.push(Orient { tail: d, head: b });
                    if first_only {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// Scan R1, R2, R3 in the given vertex ordering and apply the first match,
/// restarting from R1, until no rule applies.
pub fn apply_rules_sequential(
    graph: &MixedGraph,
    ambiguous: &BTreeSet<Triple>,
    ordering: &[usize],
) -> MixedGraph {
    let mut g = graph.clone();
    loop {
        let next = r1_matches(&g, ambiguous, ordering, true)
            .into_iter()
            .next()
            .or_else(|| r2_matches(&g, ordering, true).into_iter().next())
            .or_else(|| r3_matches(&g, ambiguous, ordering, true).into_iter().next());
        match next {
            Some(op) => g.add_arrowhead(op.tail, op.head).unwrap(),
            None => return g,
        }
    }
}

/// List-based application: per pass, collect all matches of each rule on the
/// current snapshot, apply them together, and iterate to a fixpoint.
pub fn apply_rules_lists(graph: &MixedGraph, ambiguous: &BTreeSet<Triple>) -> MixedGraph {
    let mut g = graph.clone();
    let order: Vec<usize> = (0..g.p()).collect();
    loop {
        let mut changed = false;
        for rule in 0..3 {
            let ops: BTreeSet<Orient> = match rule {
                0 => r1_matches(&g, ambiguous, &order, false),
                1 => r2_matches(&g, &order, false),
                _ => r3_matches(&g, ambiguous, &order, false),
            }
            .into_iter()
            .collect();
            for op in &ops {
                g.add_arrowhead(op.tail, op.head).unwrap();
                changed = true;
            }
        }
        if !changed {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeKind;

    /// The rule-demonstration graph: a->c, e->c, b->d, f->d, c -- d.
    fn demo_graph() -> MixedGraph {
        let mut g = MixedGraph::new(vec!["a", "b", "c", "d", "e", "f"]).unwrap();
        g.set_edge(0, 2, EdgeKind::Directed).unwrap();
        g.set_edge(4, 2, EdgeKind::Directed).unwrap();
        g.set_edge(1, 3, EdgeKind::Directed).unwrap();
        g.set_edge(5, 3, EdgeKind::Directed).unwrap();
        g.set_edge(2, 3, EdgeKind::Undirected).unwrap();
        g
    }

    #[test]
    fn sequential_is_order_dependent_on_demo_graph() {
        let g = demo_graph();
        let none = BTreeSet::new();
        // (e,c,d) or (a,c,d) first: c -> d.
        let out = apply_rules_sequential(&g, &none, &[4, 2, 3, 0, 1, 5]);
        assert_eq!(out.edge_kind(2, 3), Some(EdgeKind::Directed));
        let out = apply_rules_sequential(&g, &none, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(out.edge_kind(2, 3), Some(EdgeKind::Directed));
        // (b,d,c) or (c,d,f) first: d -> c.
        let out = apply_rules_sequential(&g, &none, &[1, 3, 2, 0, 4, 5]);
        assert_eq!(out.edge_kind(3, 2), Some(EdgeKind::Directed));
        let out = apply_rules_sequential(&g, &none, &[5, 3, 2, 0, 1, 4]);
        assert_eq!(out.edge_kind(3, 2), Some(EdgeKind::Directed));
    }

    #[test]
    fn lists_merge_conflicts_into_bidirected() {
        let g = demo_graph();
        let out = apply_rules_lists(&g, &BTreeSet::new());
        assert_eq!(out.edge_kind(2, 3), Some(EdgeKind::Bidirected));
    }

    #[test]
    fn no_matching_pattern_is_a_fixpoint() {
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(1, 2, EdgeKind::Directed).unwrap();
        let out = apply_rules_sequential(&g, &BTreeSet::new(), &[0, 1, 2]);
        assert_eq!(out, g);
        assert_eq!(apply_rules_lists(&g, &BTreeSet::new()), g);
    }

    #[test]
    fn single_match_agrees_between_modes() {
        // a -> b -- c, a and c nonadjacent: R1 orients b -> c either way.
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(1, 2, EdgeKind::Undirected).unwrap();
        let seq = apply_rules_sequential(&g, &BTreeSet::new(), &[0, 1, 2]);
        let list = apply_rules_lists(&g, &BTreeSet::new());
        assert_eq!(seq, list);
        assert_eq!(seq.edge_kind(1, 2), Some(EdgeKind::Directed));
    }

    #[test]
    fn r1_respects_bidirected_tails() {
        // a <-> b -- c also triggers R1.
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Bidirected).unwrap();
        g.set_edge(1, 2, EdgeKind::Undirected).unwrap();
        let out = apply_rules_lists(&g, &BTreeSet::new());
        assert_eq!(out.edge_kind(1, 2), Some(EdgeKind::Directed));
    }

    #[test]
    fn r2_orients_transitive_shielded_triangle() {
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(1, 2, EdgeKind::Directed).unwrap();
        g.set_edge(0, 2, EdgeKind::Undirected).unwrap();
        let out = apply_rules_lists(&g, &BTreeSet::new());
        assert_eq!(out.edge_kind(0, 2), Some(EdgeKind::Directed));
    }

    #[test]
    fn r3_orients_hub_into_collider() {
        // a -> b <- c, a -- d -- c, d -- b: orient d -> b.
        let mut g = MixedGraph::new(vec!["a", "b", "c", "d"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(2, 1, EdgeKind::Directed).unwrap();
        g.set_edge(0, 3, EdgeKind::Undirected).unwrap();
        g.set_edge(2, 3, EdgeKind::Undirected).unwrap();
        g.set_edge(3, 1, EdgeKind::Undirected).unwrap();
        let out = apply_rules_lists(&g, &BTreeSet::new());
        assert_eq!(out.edge_kind(3, 1), Some(EdgeKind::Directed));
        // The flanks stay undirected.
        assert_eq!(out.edge_kind(0, 3), Some(EdgeKind::Undirected));
        assert_eq!(out.edge_kind(2, 3), Some(EdgeKind::Undirected));
    }

    #[test]
    fn ambiguous_triples_block_rules() {
        let mut g = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Directed).unwrap();
        g.set_edge(1, 2, EdgeKind::Undirected).unwrap();
        let ambiguous = BTreeSet::from([(0, 1, 2)]);
        let out = apply_rules_lists(&g, &ambiguous);
        assert_eq!(out, g);
        let out = apply_rules_sequential(&g, &ambiguous, &[0, 1, 2]);
        assert_eq!(out, g);
    }
}
