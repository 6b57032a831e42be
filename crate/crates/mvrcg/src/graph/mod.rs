//! Mixed-graph representation shared by every stage of the pipeline.
//!
//! A [`MixedGraph`] stores at most one edge per unordered vertex pair, with an
//! endpoint mark at each end. Undirected (`--`), directed (`->`) and
//! bidirected (`<->`) edges all live in this one representation, so partially
//! oriented intermediate states of the learner need no second graph type.

mod io;
mod separation;

pub use io::ParseError;
pub use separation::SeparationQuery;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mark at one endpoint of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mark {
    Tail,
    Arrow,
}

/// Edge kind for a pair `(u, v)`, read in that direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// `u -- v`, tails at both ends.
    Undirected,
    /// `u -> v`, arrowhead at `v`.
    Directed,
    /// `u <-> v`, arrowheads at both ends.
    Bidirected,
}

impl EdgeKind {
    fn marks(self) -> (Mark, Mark) {
        match self {
            EdgeKind::Undirected => (Mark::Tail, Mark::Tail),
            EdgeKind::Directed => (Mark::Tail, Mark::Arrow),
            EdgeKind::Bidirected => (Mark::Arrow, Mark::Arrow),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex index {0} out of range")]
    UnknownVertex(usize),
    #[error("unknown vertex label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate vertex label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid vertex label `{0}`: labels must be nonempty and free of whitespace, commas and `#`")]
    InvalidLabel(String),
    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(usize),
    #[error("graphs have different vertex sets")]
    VertexMismatch,
    #[error("graph contains a partially directed cycle")]
    PartiallyDirectedCycle,
    #[error("graph is not an MVR chain graph: {0}")]
    NotMvrChainGraph(String),
    #[error("invalid separation query: {0}")]
    InvalidQuery(String),
}

fn label_ok(label: &str) -> bool {
    !label.is_empty() && !label.contains([' ', '\t', ',', '#'])
}

/// A vertex-labelled mixed graph over a fixed vertex set `0..p`.
///
/// Vertices are dense indices; labels are unique display names. All queries
/// are read-only; mutation goes through `&mut self` methods, so a shared
/// graph is immutable and safe to query from concurrent contexts.
#[derive(Clone, PartialEq, Eq)]
pub struct MixedGraph {
    labels: Vec<String>,
    // marks[u * p + v] = mark at v on the edge {u, v}; None when absent.
    // Invariant: presence is symmetric and the diagonal is None.
    marks: Vec<Option<Mark>>,
}

impl MixedGraph {
    /// Empty graph with the given labels.
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self, GraphError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !label_ok(l) {
                return Err(GraphError::InvalidLabel(l.clone()));
            }
            if !seen.insert(l.clone()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        let p = labels.len();
        Ok(Self { labels, marks: vec![None; p * p] })
    }

    /// Empty graph with labels `x0, x1, ...`.
    pub fn with_vertex_count(p: usize) -> Self {
        Self::new((0..p).map(|i| format!("x{i}")).collect::<Vec<_>>()).unwrap()
    }

    /// Complete undirected graph over the given labels.
    pub fn complete_undirected<S: Into<String>>(labels: Vec<S>) -> Result<Self, GraphError> {
        let mut g = Self::new(labels)?;
        for u in 0..g.p() {
            for v in (u + 1)..g.p() {
                g.set_edge(u, v, EdgeKind::Undirected).unwrap();
            }
        }
        Ok(g)
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, GraphError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GraphError::UnknownLabel(label.to_string()))
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.p() { Ok(()) } else { Err(GraphError::UnknownVertex(v)) }
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    #[inline]
    fn idx(&self, u: usize, v: usize) -> usize {
        u * self.p() + v
    }

    /// Mark at `v` on the edge `{u, v}`, if the edge exists.
    #[inline]
    pub fn mark_at(&self, u: usize, v: usize) -> Option<Mark> {
        self.marks[self.idx(u, v)]
    }

    /// Endpoint marks `(at u, at v)` of the edge `{u, v}`.
    #[inline]
    pub fn edge(&self, u: usize, v: usize) -> Option<(Mark, Mark)> {
        Some((self.marks[self.idx(v, u)]?, self.marks[self.idx(u, v)]?))
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.marks[self.idx(u, v)].is_some()
    }

    /// Edge kind of `{u, v}` read from `u` to `v`. Returns `None` when there
    /// is no edge or when the edge is directed `v -> u`; use [`Self::edge`]
    /// for the raw marks.
    pub fn edge_kind(&self, u: usize, v: usize) -> Option<EdgeKind> {
        match self.edge(u, v)? {
            (Mark::Tail, Mark::Tail) => Some(EdgeKind::Undirected),
            (Mark::Tail, Mark::Arrow) => Some(EdgeKind::Directed),
            (Mark::Arrow, Mark::Tail) => None,
            (Mark::Arrow, Mark::Arrow) => Some(EdgeKind::Bidirected),
        }
    }

    /// Edge of `{u, v}` as `(src, dst, kind)`: `src -> dst` for directed
    /// edges, `src < dst` otherwise.
    pub fn oriented_edge(&self, u: usize, v: usize) -> Option<(usize, usize, EdgeKind)> {
        let (a, b) = (u.min(v), u.max(v));
        match self.edge(a, b)? {
            (Mark::Tail, Mark::Tail) => Some((a, b, EdgeKind::Undirected)),
            (Mark::Arrow, Mark::Arrow) => Some((a, b, EdgeKind::Bidirected)),
            (Mark::Tail, Mark::Arrow) => Some((a, b, EdgeKind::Directed)),
            (Mark::Arrow, Mark::Tail) => Some((b, a, EdgeKind::Directed)),
        }
    }

    /// Set or replace the edge `{u, v}` with the given kind read `u` to `v`.
    pub fn set_edge(&mut self, u: usize, v: usize, kind: EdgeKind) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        let (at_u, at_v) = kind.marks();
        let (iu, iv) = (self.idx(v, u), self.idx(u, v));
        self.marks[iu] = Some(at_u);
        self.marks[iv] = Some(at_v);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        let (iu, iv) = (self.idx(v, u), self.idx(u, v));
        self.marks[iu] = None;
        self.marks[iv] = None;
        Ok(())
    }

    /// Add an arrowhead at `v` on the existing edge `{u, v}`, keeping the mark
    /// at `u`. An edge already arrow-marked at `u` becomes bidirected.
    pub fn add_arrowhead(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        let iv = self.idx(u, v);
        if self.marks[iv].is_none() {
            return Err(GraphError::InvalidQuery(format!(
                "no edge between {} and {}",
                self.labels[u], self.labels[v]
            )));
        }
        self.marks[iv] = Some(Mark::Arrow);
        Ok(())
    }

    /// All vertices joined to `v` by any edge type, in index order.
    pub fn adjacency_set(&self, v: usize) -> Result<Vec<usize>, GraphError> {
        self.check_vertex(v)?;
        Ok((0..self.p()).filter(|&u| self.has_edge(u, v)).collect())
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.p()).filter(|&u| self.has_edge(u, v)).count()
    }

    /// Edges as `(src, dst, kind)` in unordered-pair index order, with
    /// directed edges reported tail first.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeKind)> {
        let mut out = Vec::new();
        for u in 0..self.p() {
            for v in (u + 1)..self.p() {
                if let Some(e) = self.oriented_edge(u, v) {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Unordered adjacency pairs `(u, v)` with `u < v`.
    pub fn skeleton_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for u in 0..self.p() {
            for v in (u + 1)..self.p() {
                if self.has_edge(u, v) {
                    out.insert((u, v));
                }
            }
        }
        out
    }

    /// Copy with every edge replaced by an undirected edge.
    pub fn skeleton(&self) -> MixedGraph {
        let mut g = MixedGraph { labels: self.labels.clone(), marks: vec![None; self.marks.len()] };
        for (u, v) in self.skeleton_edges() {
            g.set_edge(u, v, EdgeKind::Undirected).unwrap();
        }
        g
    }

    /// Parents, neighbors and boundary of a vertex set, each excluding the set
    /// itself. Parents reach the set by a directed edge, neighbors by a
    /// bidirected edge; the boundary is their union.
    pub fn relations(&self, set: &[usize]) -> Result<Relations, GraphError> {
        for &v in set {
            self.check_vertex(v)?;
        }
        let in_set: BTreeSet<usize> = set.iter().copied().collect();
        let mut parents = BTreeSet::new();
        let mut neighbors = BTreeSet::new();
        for &a in &in_set {
            for u in 0..self.p() {
                if in_set.contains(&u) {
                    continue;
                }
                match self.edge(u, a) {
                    Some((Mark::Tail, Mark::Arrow)) => {
                        parents.insert(u);
                    }
                    Some((Mark::Arrow, Mark::Arrow)) => {
                        neighbors.insert(u);
                    }
                    _ => {}
                }
            }
        }
        let boundary = parents.union(&neighbors).copied().collect();
        Ok(Relations { parents, neighbors, boundary })
    }

    /// Strict ancestors of a vertex set: vertices with a directed path into
    /// the set. Only `->` edges count.
    pub fn ancestors(&self, set: &[usize]) -> Result<BTreeSet<usize>, GraphError> {
        for &v in set {
            self.check_vertex(v)?;
        }
        let mut result = BTreeSet::new();
        let mut stack: Vec<usize> = set.to_vec();
        let mut seen: Vec<bool> = vec![false; self.p()];
        while let Some(w) = stack.pop() {
            for u in 0..self.p() {
                if !seen[u] && self.edge(u, w) == Some((Mark::Tail, Mark::Arrow)) {
                    seen[u] = true;
                    result.insert(u);
                    stack.push(u);
                }
            }
        }
        Ok(result)
    }

    /// Ancestral closure `An(X) = an(X) ∪ X`.
    pub fn ancestral_closure(&self, set: &[usize]) -> Result<BTreeSet<usize>, GraphError> {
        let mut an = self.ancestors(set)?;
        an.extend(set.iter().copied());
        Ok(an)
    }

    /// True iff there is a cycle of three or more vertices whose edges all
    /// point forward (`->` or `<->`) with at least one `->` among them.
    pub fn has_partially_directed_cycle(&self) -> bool {
        // u -> v lies on such a cycle iff v reaches u through forward arcs,
        // where a bidirected edge is an arc both ways.
        let forward = |a: usize, b: usize| match self.edge(a, b) {
            Some((Mark::Tail, Mark::Arrow)) | Some((Mark::Arrow, Mark::Arrow)) => true,
            _ => false,
        };
        for u in 0..self.p() {
            for v in 0..self.p() {
                if u == v || self.edge(u, v) != Some((Mark::Tail, Mark::Arrow)) {
                    continue;
                }
                // BFS from v back to u.
                let mut seen = vec![false; self.p()];
                let mut queue = std::collections::VecDeque::from([v]);
                seen[v] = true;
                while let Some(w) = queue.pop_front() {
                    if w == u {
                        return true;
                    }
                    for z in 0..self.p() {
                        if !seen[z] && forward(w, z) {
                            seen[z] = true;
                            queue.push_back(z);
                        }
                    }
                }
            }
        }
        false
    }

    /// Connected components of the subgraph of non-directed edges.
    ///
    /// Errors if the graph has a partially directed cycle, since chain
    /// components are only defined for chain graphs.
    pub fn chain_components(&self) -> Result<Vec<Vec<usize>>, GraphError> {
        if self.has_partially_directed_cycle() {
            return Err(GraphError::PartiallyDirectedCycle);
        }
        let linked = |a: usize, b: usize| {
            matches!(
                self.edge(a, b),
                Some((Mark::Arrow, Mark::Arrow)) | Some((Mark::Tail, Mark::Tail))
            )
        };
        let mut comp = vec![usize::MAX; self.p()];
        let mut components = Vec::new();
        for s in 0..self.p() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut stack = vec![s];
            while let Some(w) = stack.pop() {
                for z in 0..self.p() {
                    if comp[z] == usize::MAX && linked(w, z) {
                        comp[z] = id;
                        members.push(z);
                        stack.push(z);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        Ok(components)
    }

    /// True iff the graph has only `->`/`<->` edges and no partially directed
    /// cycle (a DAG qualifies).
    pub fn is_mvr_cg(&self) -> bool {
        self.validate_mvr_cg().is_ok()
    }

    pub fn validate_mvr_cg(&self) -> Result<(), GraphError> {
        for (u, v, kind) in self.edges() {
            if kind == EdgeKind::Undirected {
                return Err(GraphError::NotMvrChainGraph(format!(
                    "undirected edge {} -- {}",
                    self.labels[u], self.labels[v]
                )));
            }
        }
        if self.has_partially_directed_cycle() {
            return Err(GraphError::NotMvrChainGraph(
                "partially directed cycle present".into(),
            ));
        }
        Ok(())
    }

    /// Unshielded triples `(u, w, v)` with `u < v`, `w` adjacent to both and
    /// `u, v` nonadjacent.
    pub fn unshielded_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for w in 0..self.p() {
            let adj = self.adjacency_set(w).unwrap();
            for (i, &u) in adj.iter().enumerate() {
                for &v in &adj[i + 1..] {
                    if !self.has_edge(u, v) {
                        out.push((u, w, v));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Unshielded colliders `(u, w, v)` with `u < v`: both edges carry an
    /// arrowhead at `w` and `u, v` are nonadjacent.
    pub fn unshielded_colliders(&self) -> BTreeSet<(usize, usize, usize)> {
        self.unshielded_triples()
            .into_iter()
            .filter(|&(u, w, v)| {
                self.mark_at(u, w) == Some(Mark::Arrow) && self.mark_at(v, w) == Some(Mark::Arrow)
            })
            .collect()
    }

    /// Markov equivalence: same skeleton and same unshielded colliders.
    pub fn markov_equivalent(&self, other: &MixedGraph) -> Result<bool, GraphError> {
        if self.labels != other.labels {
            return Err(GraphError::VertexMismatch);
        }
        Ok(self.skeleton_edges() == other.skeleton_edges()
            && self.unshielded_colliders() == other.unshielded_colliders())
    }
}

impl fmt::Debug for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MixedGraph({})", self.to_edge_list().replace('\n', "; "))
    }
}

/// Result of [`MixedGraph::relations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relations {
    pub parents: BTreeSet<usize>,
    pub neighbors: BTreeSet<usize>,
    pub boundary: BTreeSet<usize>,
}
