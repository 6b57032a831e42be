//! Synthetic MVR chain graphs and linear-Gaussian samples.
//!
//! Graph generation follows the adjacency-matrix procedure: Bernoulli fill of
//! the lower triangle with occurrence probability `N / (p - 1)`, symmetrize,
//! split the vertex range into k equal-length intervals forming the chain
//! components, and zero the lower-triangle entries that cross components.
//! Within a component the surviving pairs decode to bidirected edges, across
//! components to directed edges from the earlier component.
//!
//! Sampling replaces each bidirected edge by a fresh latent common parent and
//! ancestrally samples the linear SEM `X_v = sum_u w_uv X_u + eps_v` with the
//! latent columns dropped.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::graph::{EdgeKind, GraphError, MixedGraph};
use crate::seeding::rng_from_seed;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("graph is not an MVR chain graph: {0}")]
    NotMvrCg(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parameters of the random MVR CG generator.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GeneratorParams {
    /// Vertex count, at least 1.
    pub p: usize,
    /// Expected adjacent-vertex count, in `[0, p - 1]`.
    pub n_expected: f64,
    pub seed: u64,
    /// Fixed chain-component count; drawn uniformly from `{1..p}` when
    /// absent.
    pub k: Option<usize>,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.p < 1 {
            return Err(SimError::Params("p must be at least 1".into()));
        }
        let max = (self.p - 1) as f64;
        if !(0.0..=max).contains(&self.n_expected) {
            return Err(SimError::Params(format!(
                "expected degree must lie in [0, {max}]"
            )));
        }
        if let Some(k) = self.k {
            if k < 1 || k > self.p {
                return Err(SimError::Params(format!("k must lie in 1..={}", self.p)));
            }
        }
        Ok(())
    }
}

/// Split `0..p` into `k` equal-length intervals, earlier intervals taking the
/// remainder, and return each vertex's interval index.
fn interval_of(p: usize, k: usize) -> Vec<usize> {
    let base = p / k;
    let rem = p % k;
    let mut out = Vec::with_capacity(p);
    for interval in 0..k {
        let len = base + usize::from(interval < rem);
        out.extend(std::iter::repeat(interval).take(len));
    }
    out
}

/// Generate a random MVR chain graph.
pub fn random_mvr_cg(params: &GeneratorParams) -> Result<MixedGraph, SimError> {
    params.validate()?;
    let p = params.p;
    let mut rng = rng_from_seed(params.seed);
    let s = if p > 1 { params.n_expected / (p - 1) as f64 } else { 0.0 };

    // Lower-triangle Bernoulli fill, then symmetrize.
    let mut a = vec![vec![0u8; p]; p];
    for i in 1..p {
        for j in 0..i {
            let hit = rng.random_bool(s);
            a[i][j] = hit as u8;
            a[j][i] = a[i][j];
        }
    }
    let k = match params.k {
        Some(k) => k,
        None => rng.random_range(1..=p),
    };
    let interval = interval_of(p, k);
    // Zero cross-component entries in the lower triangle: the surviving
    // upper entry decodes to a directed edge out of the earlier component.
    for i in 1..p {
        for j in 0..i {
            if interval[i] > interval[j] {
                a[i][j] = 0;
            }
        }
    }

    let mut g = MixedGraph::with_vertex_count(p);
    for i in 1..p {
        for j in 0..i {
            match (a[i][j], a[j][i]) {
                (1, 1) => g.set_edge(j, i, EdgeKind::Bidirected)?,
                (0, 1) => g.set_edge(j, i, EdgeKind::Directed)?,
                (0, 0) => {}
                _ => unreachable!("lower-triangle zeroing cannot strand a lower entry"),
            }
        }
    }
    debug_assert!(g.is_mvr_cg());
    Ok(g)
}

/// A DAG over observed plus latent vertices, with SEM weights and noise
/// variances. Every latent has exactly two children and no parents.
#[derive(Debug, Clone)]
pub struct LatentDag {
    pub dag: MixedGraph,
    pub observed: Vec<usize>,
    pub latents: Vec<usize>,
    /// Weight of each directed edge `(tail, head)`.
    pub weights: std::collections::BTreeMap<(usize, usize), f64>,
    pub noise_variances: Vec<f64>,
}

/// Replace each bidirected edge of an MVR CG by a fresh latent common parent
/// and draw the SEM weights: uniform magnitudes in `[0.5, 1.5]` with random
/// sign, unit noise everywhere.
pub fn cg_to_dag_with_latents(cg: &MixedGraph, seed: u64) -> Result<LatentDag, SimError> {
    cg.validate_mvr_cg().map_err(|e| SimError::NotMvrCg(e.to_string()))?;
    let p = cg.p();
    let mut rng = rng_from_seed(seed);
    let draw_weight = |rng: &mut rand_chacha::ChaCha8Rng| {
        let magnitude = rng.random_range(0.5..=1.5);
        if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    };

    let bidirected: Vec<(usize, usize)> = cg
        .edges()
        .iter()
        .filter(|&&(_, _, k)| k == EdgeKind::Bidirected)
        .map(|&(u, v, _)| (u, v))
        .collect();

    let mut labels: Vec<String> = cg.labels().to_vec();
    for i in 0..bidirected.len() {
        let mut name = format!("_h{i}");
        while labels.contains(&name) {
            name.push('_');
        }
        labels.push(name);
    }
    let mut dag = MixedGraph::new(labels)?;
    let mut weights = std::collections::BTreeMap::new();

    for (src, dst, kind) in cg.edges() {
        if kind == EdgeKind::Directed {
            dag.set_edge(src, dst, EdgeKind::Directed)?;
            weights.insert((src, dst), draw_weight(&mut rng));
        }
    }
    for (i, &(u, v)) in bidirected.iter().enumerate() {
        let h = p + i;
        dag.set_edge(h, u, EdgeKind::Directed)?;
        dag.set_edge(h, v, EdgeKind::Directed)?;
        weights.insert((h, u), draw_weight(&mut rng));
        weights.insert((h, v), draw_weight(&mut rng));
    }

    Ok(LatentDag {
        dag,
        observed: (0..p).collect(),
        latents: (p..p + bidirected.len()).collect(),
        weights,
        noise_variances: vec![1.0; p + bidirected.len()],
    })
}

/// Ancestral sampling of the linear SEM; latent columns are dropped.
/// Deterministic in `(ldag, n, seed)`.
pub fn sample_gaussian(ldag: &LatentDag, n: usize, seed: u64) -> Result<Dataset, SimError> {
    if n < 1 {
        return Err(SimError::Params("sample size must be at least 1".into()));
    }
    let total = ldag.dag.p();
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();

    // Parents with weights, and a topological order (latents are roots, the
    // directed part of an MVR CG is acyclic).
    let mut parents: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
    for (&(tail, head), &w) in &ldag.weights {
        parents[head].push((tail, w));
    }
    let mut indegree: Vec<usize> = parents.iter().map(|ps| ps.len()).collect();
    let mut topo: Vec<usize> = Vec::with_capacity(total);
    let mut ready: std::collections::VecDeque<usize> =
        (0..total).filter(|&v| indegree[v] == 0).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (&(tail, head), _) in &ldag.weights {
        children[tail].push(head);
    }
    while let Some(v) = ready.pop_front() {
        topo.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push_back(c);
            }
        }
    }
    if topo.len() != total {
        return Err(SimError::NotMvrCg("latent expansion has a directed cycle".into()));
    }

    let mut rows = Vec::with_capacity(n);
    let mut values = vec![0.0; total];
    for _ in 0..n {
        // Noise drawn in vertex-index order for reproducibility.
        let noises: Vec<f64> = (0..total)
            .map(|v| normal.sample(&mut rng) * ldag.noise_variances[v].sqrt())
            .collect();
        for &v in &topo {
            let mut x = noises[v];
            for &(u, w) in &parents[v] {
                x += w * values[u];
            }
            values[v] = x;
        }
        rows.push(ldag.observed.iter().map(|&v| values[v]).collect());
    }
    let labels = ldag.observed.iter().map(|&v| ldag.dag.label(v).to_string()).collect();
    Ok(Dataset::new(labels, rows).expect("rows match observed columns"))
}

/// Convenience: generate, expand and sample in one call with derived seeds.
pub fn generate_and_sample(
    params: &GeneratorParams,
    n: usize,
) -> Result<(MixedGraph, LatentDag, Dataset), SimError> {
    let cg = random_mvr_cg(params)?;
    let ldag = cg_to_dag_with_latents(&cg, crate::seeding::derive_seed(params.seed, &[1]))?;
    let data = sample_gaussian(&ldag, n, crate::seeding::derive_seed(params.seed, &[2]))?;
    Ok((cg, ldag, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mark;

    fn params(p: usize, n_expected: f64, seed: u64) -> GeneratorParams {
        GeneratorParams { p, n_expected, seed, k: None }
    }

    fn sample_corr(data: &Dataset, i: usize, j: usize) -> f64 {
        let n = data.rows.len() as f64;
        let mean = |c: usize| data.rows.iter().map(|r| r[c]).sum::<f64>() / n;
        let (mi, mj) = (mean(i), mean(j));
        let mut cij = 0.0;
        let mut cii = 0.0;
        let mut cjj = 0.0;
        for r in &data.rows {
            cij += (r[i] - mi) * (r[j] - mj);
            cii += (r[i] - mi) * (r[i] - mi);
            cjj += (r[j] - mj) * (r[j] - mj);
        }
        cij / (cii * cjj).sqrt()
    }

    #[test]
    fn single_vertex_graph() {
        let g = random_mvr_cg(&params(1, 0.0, 5)).unwrap();
        assert_eq!(g.p(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn generated_graphs_are_mvr_cgs() {
        for seed in 0..200 {
            let g = random_mvr_cg(&params(3 + (seed as usize % 8), 2.0, seed)).unwrap();
            assert!(g.is_mvr_cg(), "seed {seed}");
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let a = random_mvr_cg(&params(12, 2.0, 99)).unwrap();
        let b = random_mvr_cg(&params(12, 2.0, 99)).unwrap();
        assert_eq!(a.to_edge_list(), b.to_edge_list());
    }

    #[test]
    fn mean_degree_matches_expectation() {
        // 1000 graphs at p = 50, N = 2: mean vertex degree within 2 ± 0.1.
        let mut total = 0.0;
        let graphs = 1000;
        for seed in 0..graphs {
            let g = random_mvr_cg(&params(50, 2.0, seed)).unwrap();
            total += 2.0 * g.edge_count() as f64 / g.p() as f64;
        }
        let mean = total / graphs as f64;
        assert!((mean - 2.0).abs() <= 0.1, "mean degree {mean}");
    }

    #[test]
    fn fixed_component_count_respected() {
        let g = random_mvr_cg(&GeneratorParams { p: 10, n_expected: 3.0, seed: 4, k: Some(2) })
            .unwrap();
        // Vertices 0..4 and 5..9 form the two intervals: a bidirected edge
        // never crosses them.
        for (u, v, kind) in g.edges() {
            if kind == EdgeKind::Bidirected {
                assert_eq!(u < 5, v < 5, "bidirected edge {u}-{v} crosses intervals");
            } else {
                assert!(u < 5 || v >= 5);
            }
        }
    }

    #[test]
    fn interval_split_puts_remainder_early() {
        assert_eq!(interval_of(5, 2), vec![0, 0, 0, 1, 1]);
        assert_eq!(interval_of(6, 3), vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(interval_of(3, 5), vec![0, 1, 2]);
    }

    #[test]
    fn dag_input_expands_to_itself() {
        let mut dag = MixedGraph::new(vec!["a", "b"]).unwrap();
        dag.set_edge(0, 1, EdgeKind::Directed).unwrap();
        let ldag = cg_to_dag_with_latents(&dag, 3).unwrap();
        assert!(ldag.latents.is_empty());
        assert_eq!(ldag.dag.edge_count(), 1);
    }

    #[test]
    fn bidirected_edges_become_latents_of_outdegree_two() {
        let mut cg = MixedGraph::new(vec!["a", "b", "c"]).unwrap();
        cg.set_edge(0, 1, EdgeKind::Bidirected).unwrap();
        cg.set_edge(1, 2, EdgeKind::Bidirected).unwrap();
        let ldag = cg_to_dag_with_latents(&cg, 3).unwrap();
        assert_eq!(ldag.latents.len(), 2);
        for &h in &ldag.latents {
            let children: Vec<usize> = (0..ldag.dag.p())
                .filter(|&v| ldag.dag.edge(h, v) == Some((Mark::Tail, Mark::Arrow)))
                .collect();
            assert_eq!(children.len(), 2);
            assert!(ldag.dag.relations(&[h]).unwrap().parents.is_empty());
        }
    }

    #[test]
    fn undirected_input_rejected() {
        let mut g = MixedGraph::new(vec!["a", "b"]).unwrap();
        g.set_edge(0, 1, EdgeKind::Undirected).unwrap();
        assert!(cg_to_dag_with_latents(&g, 0).is_err());
    }

    #[test]
    fn empty_graph_samples_independent_columns() {
        let g = MixedGraph::with_vertex_count(3);
        let ldag = cg_to_dag_with_latents(&g, 1).unwrap();
        let data = sample_gaussian(&ldag, 10_000, 2).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(sample_corr(&data, i, j).abs() < 0.05);
            }
        }
    }

    #[test]
    fn directed_edge_correlation_matches_sem_algebra() {
        // a -> b with weight 1 and unit noises: corr = 1/sqrt(2).
        let mut dag = MixedGraph::new(vec!["a", "b"]).unwrap();
        dag.set_edge(0, 1, EdgeKind::Directed).unwrap();
        let mut ldag = cg_to_dag_with_latents(&dag, 7).unwrap();
        ldag.weights.insert((0, 1), 1.0);
        let data = sample_gaussian(&ldag, 10_000, 11).unwrap();
        let expected = 1.0 / 2.0f64.sqrt();
        assert!((sample_corr(&data, 0, 1) - expected).abs() < 0.03);
    }

    #[test]
    fn latent_expansion_correlation_matches_sem_algebra() {
        let mut cg = MixedGraph::new(vec!["a", "b"]).unwrap();
        cg.set_edge(0, 1, EdgeKind::Bidirected).unwrap();
        let ldag = cg_to_dag_with_latents(&cg, 21).unwrap();
        let h = ldag.latents[0];
        let w_ha = ldag.weights[&(h, 0)];
        let w_hb = ldag.weights[&(h, 1)];
        let expected = w_ha * w_hb / ((w_ha * w_ha + 1.0) * (w_hb * w_hb + 1.0)).sqrt();
        let data = sample_gaussian(&ldag, 10_000, 22).unwrap();
        assert_eq!(data.labels, vec!["a", "b"]); // latent column dropped
        assert!((sample_corr(&data, 0, 1) - expected).abs() < 0.03);
    }

    #[test]
    fn sampling_is_reproducible() {
        let (_, ldag, _) = generate_and_sample(&params(6, 2.0, 17), 50).unwrap();
        let a = sample_gaussian(&ldag, 50, 9).unwrap();
        let b = sample_gaussian(&ldag, 9, 9).unwrap();
        assert_eq!(a.rows[..9], b.rows[..]);
        assert_eq!(a.to_csv_string(), sample_gaussian(&ldag, 50, 9).unwrap().to_csv_string());
    }
}
