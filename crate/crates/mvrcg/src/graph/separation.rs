//! m-separation for mixed graphs.
//!
//! The production path restricts the graph to the ancestral closure of the
//! query, builds the augmented graph of that subgraph and runs plain
//! undirected separation there. The pathwise chain enumeration is retained as
//! an independent oracle for small graphs; the two must agree.

use std::collections::{BTreeSet, VecDeque};

use super::{GraphError, Mark, MixedGraph};

/// A validated separation query `X ⊥ Y | Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

impl SeparationQuery {
    /// X and Y must be nonempty and X, Y, Z pairwise disjoint.
    pub fn new(x: Vec<usize>, y: Vec<usize>, z: Vec<usize>) -> Result<Self, GraphError> {
        if x.is_empty() || y.is_empty() {
            return Err(GraphError::InvalidQuery("X and Y must be nonempty".into()));
        }
        let xs: BTreeSet<_> = x.iter().copied().collect();
        let ys: BTreeSet<_> = y.iter().copied().collect();
        let zs: BTreeSet<_> = z.iter().copied().collect();
        if xs.len() != x.len() || ys.len() != y.len() || zs.len() != z.len() {
            return Err(GraphError::InvalidQuery("duplicate vertices in a query set".into()));
        }
        if !xs.is_disjoint(&ys) || !xs.is_disjoint(&zs) || !ys.is_disjoint(&zs) {
            return Err(GraphError::InvalidQuery("X, Y, Z must be pairwise disjoint".into()));
        }
        Ok(Self { x, y, z })
    }
}

impl MixedGraph {
    /// Undirected graph connecting every collider-connected vertex pair: a
    /// chain whose every non-endpoint has arrowheads into it from both sides.
    /// A single edge counts trivially.
    ///
    /// Runs a BFS per source over `(vertex, arrived-with-arrowhead)` states,
    /// so it stays polynomial instead of enumerating chains.
    pub fn augmented_graph(&self) -> MixedGraph {
        let p = self.p();
        let mut aug = MixedGraph::new(self.labels().to_vec()).unwrap();
        for x in 0..p {
            // seen[v][h]: reached v, arriving edge had (h == 1) an arrowhead at v.
            let mut seen = vec![[false; 2]; p];
            let mut queue = VecDeque::new();
            for y in 0..p {
                if let Some(mark_at_y) = self.mark_at(x, y) {
                    let h = (mark_at_y == Mark::Arrow) as usize;
                    if !seen[y][h] {
                        seen[y][h] = true;
                        queue.push_back((y, h));
                    }
                }
            }
            while let Some((w, h)) = queue.pop_front() {
                // Leaving w makes it a non-endpoint: it must be a collider,
                // so both incident edges need arrowheads at w.
                if h == 0 {
                    continue;
                }
                for z in 0..p {
                    if let Some((at_w, at_z)) = self.edge(w, z).map(|_| {
                        (self.mark_at(z, w).unwrap(), self.mark_at(w, z).unwrap())
                    }) {
                        if at_w != Mark::Arrow {
                            continue;
                        }
                        let hz = (at_z == Mark::Arrow) as usize;
                        if !seen[z][hz] {
                            seen[z][hz] = true;
                            queue.push_back((z, hz));
                        }
                    }
                }
            }
            for y in 0..p {
                if y != x && (seen[y][0] || seen[y][1]) {
                    aug.set_edge(x, y, super::EdgeKind::Undirected).unwrap();
                }
            }
        }
        aug
    }

    /// m*-separation: separation of X and Y by Z in the augmented graph of
    /// the subgraph induced by `An(X ∪ Y ∪ Z)`. Equals pathwise m-separation
    /// on MVR chain graphs.
    pub fn m_separated(&self, query: &SeparationQuery) -> Result<bool, GraphError> {
        for &v in query.x.iter().chain(&query.y).chain(&query.z) {
            if v >= self.p() {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        let mut all: Vec<usize> = query.x.clone();
        all.extend(&query.y);
        all.extend(&query.z);
        let closure = self.ancestral_closure(&all)?;

        // Induced subgraph on the closure: same vertex set, edges restricted.
        let mut sub = MixedGraph::new(self.labels().to_vec()).unwrap();
        for u in 0..self.p() {
            for v in (u + 1)..self.p() {
                if closure.contains(&u) && closure.contains(&v) {
                    if let Some((at_u, at_v)) = self.edge(u, v) {
                        let (iu, iv) = (sub.idx(v, u), sub.idx(u, v));
                        sub.marks[iu] = Some(at_u);
                        sub.marks[iv] = Some(at_v);
                    }
                }
            }
        }
        let aug = sub.augmented_graph();

        // Plain undirected separation in the augmented graph, avoiding Z.
        let blocked: Vec<bool> = {
            let mut b = vec![false; self.p()];
            for &z in &query.z {
                b[z] = true;
            }
            b
        };
        let targets: Vec<bool> = {
            let mut t = vec![false; self.p()];
            for &y in &query.y {
                t[y] = true;
            }
            t
        };
        let mut seen = vec![false; self.p()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &x in &query.x {
            if !blocked[x] {
                seen[x] = true;
                queue.push_back(x);
            }
        }
        while let Some(w) = queue.pop_front() {
            if targets[w] {
                return Ok(false);
            }
            for z in 0..self.p() {
                if !seen[z] && !blocked[z] && aug.has_edge(w, z) {
                    seen[z] = true;
                    queue.push_back(z);
                }
            }
        }
        Ok(true)
    }

    /// Convenience single-pair query.
    pub fn m_separated_pair(&self, u: usize, v: usize, z: &[usize]) -> Result<bool, GraphError> {
        self.m_separated(&SeparationQuery::new(vec![u], vec![v], z.to_vec())?)
    }

    /// Brute-force chain enumeration applying the collider/noncollider
    /// blocking definition verbatim: a chain is m-connecting given Z iff
    /// every noncollider on it is outside Z and every collider is in An(Z).
    ///
    /// Exponential; intended as a test oracle on small graphs.
    pub fn m_connecting_chain_exists(
        &self,
        u: usize,
        v: usize,
        z: &[usize],
    ) -> Result<bool, GraphError> {
        self.check_pair(u, v)?;
        if z.contains(&u) || z.contains(&v) {
            return Err(GraphError::InvalidQuery("endpoints must not be in Z".into()));
        }
        for &w in z {
            self.check_vertex(w)?;
        }
        let an_z = self.ancestral_closure(z)?;
        let in_z: Vec<bool> = {
            let mut b = vec![false; self.p()];
            for &w in z {
                b[w] = true;
            }
            b
        };
        let mut on_path = vec![false; self.p()];
        on_path[u] = true;
        Ok(self.chain_dfs(None, u, v, &in_z, &an_z, &mut on_path))
    }

    // Extending the chain past `last` turns it into a non-endpoint, so its
    // collider/noncollider status is checked at that moment against the
    // actual predecessor and successor edges.
    fn chain_dfs(
        &self,
        prev: Option<usize>,
        last: usize,
        target: usize,
        in_z: &[bool],
        an_z: &BTreeSet<usize>,
        on_path: &mut Vec<bool>,
    ) -> bool {
        if last == target {
            return true;
        }
        for next in 0..self.p() {
            if on_path[next] || !self.has_edge(last, next) {
                continue;
            }
            if let Some(prev) = prev {
                let collider = self.mark_at(prev, last) == Some(Mark::Arrow)
                    && self.mark_at(next, last) == Some(Mark::Arrow);
                let open = if collider { an_z.contains(&last) } else { !in_z[last] };
                if !open {
                    continue;
                }
            }
            on_path[next] = true;
            if self.chain_dfs(Some(last), next, target, in_z, an_z, on_path) {
                on_path[next] = false;
                return true;
            }
            on_path[next] = false;
        }
        false
    }

    /// Pathwise m-separation of sets, negating the chain oracle pairwise.
    pub fn m_separated_pathwise(&self, query: &SeparationQuery) -> Result<bool, GraphError> {
        for &x in &query.x {
            for &y in &query.y {
                if self.m_connecting_chain_exists(x, y, &query.z)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
