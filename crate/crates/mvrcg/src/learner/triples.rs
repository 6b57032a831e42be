//! Unshielded-triple classification and v-structure orientation.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::citest::CiTester;
use crate::graph::MixedGraph;

use super::SepsetMap;

/// Orientation status of one unshielded triple `(i, j, k)`, `i < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TripleStatus {
    Collider,
    NonCollider,
    Ambiguous,
}

/// Classification record for an unshielded triple: the midpoint `j` is
/// adjacent to both endpoints, which are themselves nonadjacent.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleLabel {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub status: TripleStatus,
    /// Separating sets containing `j`, over the total found.
    pub sepsets_with_j: usize,
    pub sepsets_total: usize,
}

impl TripleLabel {
    pub fn triple(&self) -> (usize, usize, usize) {
        (self.i, self.j, self.k)
    }
}

/// Labels driven by the recorded separating sets, as in plain v-structure
/// recovery: the triple is a collider exactly when the midpoint is missing
/// from the recorded set. Never ambiguous.
pub fn labels_from_sepsets(skeleton: &MixedGraph, sepsets: &SepsetMap) -> Vec<TripleLabel> {
    skeleton
        .unshielded_triples()
        .into_iter()
        .filter_map(|(i, j, k)| {
            let s = sepsets.get(i, k)?;
            let with_j = s.contains(&j);
            Some(TripleLabel {
                i,
                j,
                k,
                status: if with_j { TripleStatus::NonCollider } else { TripleStatus::Collider },
                sepsets_with_j: with_j as usize,
                sepsets_total: 1,
            })
        })
        .collect()
}

/// Conservative / majority-rule classification.
///
/// For each unshielded triple `(i, j, k)`, every subset of `ad_H(i) \ {k}`
/// and of `ad_H(k) \ {i}` is tested; the separating sets are those judged
/// independent. With `f` the fraction containing `j`:
/// no separating set found -> ambiguous; `f*100 < lo` -> collider;
/// `f*100 > hi` -> noncollider; in between -> ambiguous. The conservative
/// special case `(lo, hi) = (0, 100)` labels by `j` in none / in all.
pub fn classify_triples(
    skeleton: &MixedGraph,
    tester: &dyn CiTester,
    lo: f64,
    hi: f64,
) -> Vec<TripleLabel> {
    assert!((0.0..=100.0).contains(&lo) && lo <= hi && hi <= 100.0);
    let conservative = lo == 0.0 && hi == 100.0;
    skeleton
        .unshielded_triples()
        .into_iter()
        .map(|(i, j, k)| {
            let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
            for (endpoint, other) in [(i, k), (k, i)] {
                let adj: Vec<usize> = skeleton
                    .adjacency_set(endpoint)
                    .unwrap()
                    .into_iter()
                    .filter(|&w| w != other)
                    .collect();
                for size in 0..=adj.len() {
                    for subset in adj.iter().copied().combinations(size) {
                        candidates.insert(subset);
                    }
                }
            }
            let separating: Vec<&Vec<usize>> = candidates
                .iter()
                .filter(|s| tester.test(i, k, s).independent)
                .collect();
            let total = separating.len();
            let with_j = separating.iter().filter(|s| s.contains(&j)).count();
            let status = if total == 0 {
                TripleStatus::Ambiguous
            } else if conservative {
                if with_j == 0 {
                    TripleStatus::Collider
                } else if with_j == total {
                    TripleStatus::NonCollider
                } else {
                    TripleStatus::Ambiguous
                }
            } else {
                let percent = 100.0 * with_j as f64 / total as f64;
                if percent < lo {
                    TripleStatus::Collider
                } else if percent > hi {
                    TripleStatus::NonCollider
                } else {
                    TripleStatus::Ambiguous
                }
            };
            TripleLabel { i, j, k, status, sepsets_with_j: with_j, sepsets_total: total }
        })
        .collect()
}

/// Add the arrowheads of every collider-labelled triple: both edges get an
/// arrowhead at the midpoint, merging into bidirected edges where the far
/// end already carries one. Pure union, so label order never matters.
pub fn orient_colliders(graph: &mut MixedGraph, labels: &[TripleLabel]) {
    for label in labels {
        if label.status == TripleStatus::Collider {
            graph.add_arrowhead(label.i, label.j).unwrap();
            graph.add_arrowhead(label.k, label.j).unwrap();
        }
    }
}

/// Plain v-structure recovery: orient every unshielded triple whose recorded
/// separating set omits the midpoint.
pub fn vstructures_plain(skeleton: &MixedGraph, sepsets: &SepsetMap) -> MixedGraph {
    let mut graph = skeleton.clone();
    orient_colliders(&mut graph, &labels_from_sepsets(skeleton, sepsets));
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citest::ScriptedTester;
    use crate::graph::EdgeKind;

    fn dag_two() -> MixedGraph {
        let mut d = MixedGraph::new(vec!["a", "b", "c", "d", "e"]).unwrap();
        for (u, v) in [(1, 0), (2, 0), (1, 3), (2, 4), (3, 4)] {
            d.set_edge(u, v, EdgeKind::Directed).unwrap();
        }
        d
    }

    fn skeleton_two() -> MixedGraph {
        // a-b, a-c, b-d, c-e, d-e: skeleton of the second worked example.
        let mut h = MixedGraph::new(vec!["a", "b", "c", "d", "e"]).unwrap();
        for (u, v) in [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)] {
            h.set_edge(u, v, EdgeKind::Undirected).unwrap();
        }
        h
    }

    /// Script with separating sets {b}, {e}, {b,e} for the pair (c, d).
    fn example_five_tester() -> ScriptedTester {
        ScriptedTester::over_oracle(
            dag_two(),
            vec![
                (2, 3, vec![], false),
                (2, 3, vec![1], true),
                (2, 3, vec![4], true),
                (2, 3, vec![1, 4], true),
            ],
        )
        .unwrap()
    }

    #[test]
    fn plain_vstructures_depend_on_sepset_content() {
        let h = skeleton_two();
        let mut sepsets = SepsetMap::new();
        sepsets.insert(1, 2, vec![]).unwrap(); // b ⊥ c | ∅
        sepsets.insert(0, 3, vec![1]).unwrap();
        sepsets.insert(1, 4, vec![3]).unwrap();
        sepsets.insert(0, 4, vec![1, 2]).unwrap();
        sepsets.insert(2, 3, vec![1]).unwrap(); // S_cd = {b}: collider at e
        let g = vstructures_plain(&h, &sepsets);
        assert_eq!(g.edge_kind(1, 0), Some(EdgeKind::Directed));
        assert_eq!(g.edge_kind(2, 0), Some(EdgeKind::Directed));
        assert_eq!(g.edge_kind(2, 4), Some(EdgeKind::Directed));
        assert_eq!(g.edge_kind(3, 4), Some(EdgeKind::Directed));
        assert_eq!(g.edge_kind(1, 3), Some(EdgeKind::Undirected));

        sepsets.insert(2, 3, vec![4]).unwrap(); // S_cd = {e}: no collider at e
        let g = vstructures_plain(&h, &sepsets);
        assert_eq!(g.edge_kind(1, 0), Some(EdgeKind::Directed));
        assert_eq!(g.edge_kind(2, 0), Some(EdgeKind::Directed));
        assert_eq!(g.edge_kind(2, 4), Some(EdgeKind::Undirected));
        assert_eq!(g.edge_kind(3, 4), Some(EdgeKind::Undirected));
        assert_eq!(g.edge_kind(1, 3), Some(EdgeKind::Undirected));
    }

    #[test]
    fn no_unshielded_triples_leaves_graph_unchanged() {
        let h = MixedGraph::complete_undirected(vec!["a", "b", "c"]).unwrap();
        let g = vstructures_plain(&h, &SepsetMap::new());
        assert_eq!(g, h);
    }

    #[test]
    fn conservative_and_majority_on_worked_example() {
        let h = skeleton_two();
        let tester = example_five_tester();
        let find = |labels: &[TripleLabel]| {
            labels.iter().find(|l| l.triple() == (2, 4, 3)).cloned().unwrap()
        };
        let conservative = classify_triples(&h, &tester, 0.0, 100.0);
        let t = find(&conservative);
        assert_eq!(t.status, TripleStatus::Ambiguous);
        assert_eq!((t.sepsets_with_j, t.sepsets_total), (2, 3));

        let majority = classify_triples(&h, &tester, 50.0, 50.0);
        let t = find(&majority);
        assert_eq!(t.status, TripleStatus::NonCollider);

        // The collider b -> a <- c is unambiguous under both.
        for labels in [&conservative, &majority] {
            let t = labels.iter().find(|l| l.triple() == (1, 0, 2)).unwrap();
            assert_eq!(t.status, TripleStatus::Collider);
        }
    }

    #[test]
    fn boundary_fraction_is_ambiguous() {
        // f = 50% exactly at lo = hi = 50 stays ambiguous.
        let h = skeleton_two();
        let tester = ScriptedTester::over_oracle(
            dag_two(),
            vec![
                (2, 3, vec![], false),
                (2, 3, vec![1], true),
                (2, 3, vec![4], true),
                (2, 3, vec![1, 4], false),
            ],
        )
        .unwrap();
        let labels = classify_triples(&h, &tester, 50.0, 50.0);
        let t = labels.iter().find(|l| l.triple() == (2, 4, 3)).unwrap();
        assert_eq!((t.sepsets_with_j, t.sepsets_total), (1, 2));
        assert_eq!(t.status, TripleStatus::Ambiguous);
    }

    #[test]
    fn perfect_oracle_leaves_no_ambiguity() {
        let truth = dag_two();
        let tester = crate::citest::OracleTester::new(truth.clone()).unwrap();
        let labels = classify_triples(&truth.skeleton(), &tester, 0.0, 100.0);
        assert!(!labels.is_empty());
        assert!(labels.iter().all(|l| l.status != TripleStatus::Ambiguous));
    }
}
