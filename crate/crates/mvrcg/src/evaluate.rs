//! Essential graphs, recovery metrics and the benchmark grid.
//!
//! All quality measures are computed on essential graphs rather than on the
//! chain graphs directly, so spurious differences from the free orientation
//! of residual undirected edges never show up in the numbers.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::citest::{CachedTester, GaussianTester, OracleTester, SufficientStats};
use crate::graph::{GraphError, MixedGraph};
use crate::learner::{apply_rules_lists, learn, LearnError, LearnerConfig, Variant};
use crate::seeding::derive_seed;
use crate::simulate::{cg_to_dag_with_latents, random_mvr_cg, sample_gaussian, GeneratorParams, SimError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid benchmark grid: {0}")]
    Grid(String),
}

/// Essential graph of an MVR CG: its skeleton plus every arrowhead shared by
/// the whole Markov equivalence class, computed as skeleton + unshielded
/// colliders + closure under the orientation rules in list mode. May contain
/// undirected, directed and bidirected edges.
pub fn essential_graph(cg: &MixedGraph) -> Result<MixedGraph, EvalError> {
    cg.validate_mvr_cg()?;
    let mut g = cg.skeleton();
    for (u, w, v) in cg.unshielded_colliders() {
        g.add_arrowhead(u, w)?;
        g.add_arrowhead(v, w)?;
    }
    Ok(apply_rules_lists(&g, &std::collections::BTreeSet::new()))
}

/// Structural Hamming distance: per unordered pair, one unit when the
/// adjacency differs, one unit when the adjacency agrees but the endpoint
/// marks differ. Realizes the minimal count of edge additions/deletions and
/// orientation changes.
pub fn shd(a: &MixedGraph, b: &MixedGraph) -> Result<u64, GraphError> {
    if a.labels() != b.labels() {
        return Err(GraphError::VertexMismatch);
    }
    let mut total = 0;
    for u in 0..a.p() {
        for v in (u + 1)..a.p() {
            total += match (a.edge(u, v), b.edge(u, v)) {
                (None, None) => 0,
                (Some(x), Some(y)) => u64::from(x != y),
                _ => 1,
            };
        }
    }
    Ok(total)
}

/// Skeleton-level confusion rates plus SHD for one learned/true pair of
/// essential graphs.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct MetricsRecord {
    pub tpr: f64,
    pub fpr: f64,
    pub tdr: f64,
    pub acc: f64,
    pub shd: u64,
    pub runtime_ms: f64,
    /// True when a guarded denominator (no true edges, or an empty learned
    /// graph) forced a defined-by-convention value.
    pub degenerate: bool,
}

/// Compare two essential graphs over the same vertex set. Guarded
/// denominators: no true edges defines TPR = 1, an empty learned graph
/// defines TDR = 1, no true gaps defines FPR = 0; all flagged.
pub fn metrics(
    learned: &MixedGraph,
    truth: &MixedGraph,
    runtime_ms: f64,
) -> Result<MetricsRecord, GraphError> {
    if learned.labels() != truth.labels() {
        return Err(GraphError::VertexMismatch);
    }
    let p = truth.p();
    let pairs = p * (p - 1) / 2;
    let learned_edges = learned.skeleton_edges();
    let true_edges = truth.skeleton_edges();
    let tp = learned_edges.intersection(&true_edges).count() as f64;
    let fp = learned_edges.difference(&true_edges).count() as f64;
    let pos = true_edges.len() as f64;
    let neg = (pairs - true_edges.len()) as f64;
    let tn = neg - fp;

    let mut degenerate = false;
    let tpr = if pos > 0.0 {
        tp / pos
    } else {
        degenerate = true;
        1.0
    };
    let fpr = if neg > 0.0 {
        fp / neg
    } else {
        degenerate = true;
        0.0
    };
    let tdr = if !learned_edges.is_empty() {
        tp / learned_edges.len() as f64
    } else {
        degenerate = true;
        1.0
    };
    let acc = if pairs > 0 { (tp + tn) / (pos + neg) } else { 1.0 };
    Ok(MetricsRecord {
        tpr,
        fpr,
        tdr,
        acc,
        shd: shd(learned, truth)?,
        runtime_ms,
        degenerate,
    })
}

/// Benchmark grid over graph sizes, sample sizes, significance levels and
/// algorithm variants.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct BenchGrid {
    pub p_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub alpha_values: Vec<f64>,
    /// Expected adjacent-vertex count of the generated graphs.
    pub expected_degree: f64,
    pub replicates: usize,
    pub variants: Vec<Variant>,
    pub base_seed: u64,
    /// Replace the Gaussian test by the exact m-separation oracle.
    #[serde(default)]
    pub oracle: bool,
}

impl BenchGrid {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.p_values.is_empty()
            || self.n_values.is_empty()
            || self.alpha_values.is_empty()
            || self.variants.is_empty()
        {
            return Err(EvalError::Grid("all grid axes must be nonempty".into()));
        }
        if self.replicates < 1 {
            return Err(EvalError::Grid("replicates must be at least 1".into()));
        }
        for &a in &self.alpha_values {
            if !(a > 0.0 && a < 1.0) {
                return Err(EvalError::Grid("alpha values must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }
}

/// One benchmark row: a variant run on one replicate of one cell.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub variant: String,
    pub p: usize,
    pub n: usize,
    pub alpha: f64,
    pub replicate: usize,
    #[serde(flatten)]
    pub metrics: Option<MetricsRecord>,
    /// Present when the replicate failed instead of producing metrics.
    pub error: Option<String>,
}

/// Mean/variance summary of one grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub variant: String,
    pub p: usize,
    pub n: usize,
    pub alpha: f64,
    pub replicates: usize,
    pub failures: usize,
    pub mean: CellStats,
    pub variance: CellStats,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct CellStats {
    pub tpr: f64,
    pub fpr: f64,
    pub tdr: f64,
    pub acc: f64,
    pub shd: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub cells: Vec<CellSummary>,
}

struct ReplicateInput {
    p: usize,
    replicate: usize,
    truth_essential: MixedGraph,
    stats_by_n: Vec<(usize, SufficientStats)>,
    oracle_truth: Option<MixedGraph>,
}

fn run_replicate(grid: &BenchGrid, p: usize, replicate: usize) -> Result<ReplicateInput, String> {
    let graph_seed = derive_seed(grid.base_seed, &[p as u64, replicate as u64, 0]);
    let params = GeneratorParams {
        p,
        n_expected: grid.expected_degree.min((p - 1) as f64),
        seed: graph_seed,
        k: None,
    };
    let cg = random_mvr_cg(&params).map_err(|e| e.to_string())?;
    let truth_essential = essential_graph(&cg).map_err(|e| e.to_string())?;
    if grid.oracle {
        return Ok(ReplicateInput {
            p,
            replicate,
            truth_essential,
            stats_by_n: Vec::new(),
            oracle_truth: Some(cg),
        });
    }
    let ldag = cg_to_dag_with_latents(&cg, derive_seed(graph_seed, &[1]))
        .map_err(|e| e.to_string())?;
    let mut stats_by_n = Vec::new();
    for &n in &grid.n_values {
        let data = sample_gaussian(&ldag, n, derive_seed(graph_seed, &[2, n as u64]))
            .map_err(|e| e.to_string())?;
        let stats = SufficientStats::from_dataset(&data).map_err(|e| e.to_string())?;
        stats_by_n.push((n, stats));
    }
    Ok(ReplicateInput { p, replicate, truth_essential, stats_by_n, oracle_truth: Some(cg) })
}

fn learn_row(
    input: &ReplicateInput,
    grid: &BenchGrid,
    variant: Variant,
    n: usize,
    alpha: f64,
    stats: Option<&SufficientStats>,
) -> BenchRow {
    let truth = &input.truth_essential;
    let labels: Vec<String> = truth.labels().to_vec();
    let mut config = LearnerConfig::for_variant(variant, labels.len());
    config.alpha = (!grid.oracle).then_some(alpha);

    let started = std::time::Instant::now();
    let result: Result<crate::learner::LearnResult, LearnError> = if grid.oracle {
        let tester = CachedTester::new(
            OracleTester::new(input.oracle_truth.clone().expect("oracle truth retained"))
                .expect("generated graph is an MVR CG"),
        );
        learn(&tester, &labels, &config)
    } else {
        match GaussianTester::new(stats.expect("stats present").clone(), alpha) {
            Ok(tester) => learn(&CachedTester::new(tester), &labels, &config),
            Err(e) => {
                return BenchRow {
                    variant: variant.name().into(),
                    p: input.p,
                    n,
                    alpha,
                    replicate: input.replicate,
                    metrics: None,
                    error: Some(e.to_string()),
                }
            }
        }
    };
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    let outcome = result
        .map_err(|e| e.to_string())
        .and_then(|r| essential_graph(&r.final_cg).map_err(|e| e.to_string()))
        .and_then(|learned| metrics(&learned, truth, runtime_ms).map_err(|e| e.to_string()));
    match outcome {
        Ok(m) => BenchRow {
            variant: variant.name().into(),
            p: input.p,
            n,
            alpha,
            replicate: input.replicate,
            metrics: Some(m),
            error: None,
        },
        Err(e) => BenchRow {
            variant: variant.name().into(),
            p: input.p,
            n,
            alpha,
            replicate: input.replicate,
            metrics: None,
            error: Some(e),
        },
    }
}

/// Run the whole grid: per cell, generate a truth graph, sample, learn with
/// each variant and compute metrics. Replicates run in parallel; individual
/// failures are recorded as rows and the cell continues. Output order and
/// content are deterministic for a fixed grid.
pub fn run_benchmark(grid: &BenchGrid) -> Result<BenchOutput, EvalError> {
    grid.validate()?;
    let jobs: Vec<(usize, usize)> = grid
        .p_values
        .iter()
        .flat_map(|&p| (0..grid.replicates).map(move |r| (p, r)))
        .collect();

    let replicate_rows: Vec<Vec<BenchRow>> = jobs
        .par_iter()
        .map(|&(p, replicate)| {
            let input = match run_replicate(grid, p, replicate) {
                Ok(i) => i,
                Err(e) => {
                    // The whole replicate failed to generate; one row per
                    // would-be combination records it.
                    return grid
                        .n_values
                        .iter()
                        .flat_map(|&n| {
                            grid.alpha_values.iter().flat_map(move |&alpha| {
                                grid.variants.iter().map(move |v| (n, alpha, *v))
                            })
                        })
                        .map(|(n, alpha, v)| BenchRow {
                            variant: v.name().into(),
                            p,
                            n,
                            alpha,
                            replicate,
                            metrics: None,
                            error: Some(e.clone()),
                        })
                        .collect();
                }
            };
            let mut rows = Vec::new();
            if grid.oracle {
                for &n in &grid.n_values {
                    for &alpha in &grid.alpha_values {
                        for &variant in &grid.variants {
                            rows.push(learn_row(&input, grid, variant, n, alpha, None));
                        }
                    }
                }
            } else {
                for (n, stats) in &input.stats_by_n {
                    for &alpha in &grid.alpha_values {
                        for &variant in &grid.variants {
                            rows.push(learn_row(&input, grid, variant, *n, alpha, Some(stats)));
                        }
                    }
                }
            }
            rows
        })
        .collect();

    let mut rows: Vec<BenchRow> = replicate_rows.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.variant
            .cmp(&b.variant)
            .then(a.p.cmp(&b.p))
            .then(a.n.cmp(&b.n))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.replicate.cmp(&b.replicate))
    });

    let cells = summarize(&rows);
    Ok(BenchOutput { rows, cells })
}

fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, usize, usize, String), Vec<&BenchRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.variant.clone(), row.p, row.n, format!("{:.6}", row.alpha)))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((variant, p, n, _), group)| {
            let alpha = group[0].alpha;
            let ok: Vec<&MetricsRecord> =
                group.iter().filter_map(|r| r.metrics.as_ref()).collect();
            let count = ok.len().max(1) as f64;
            let pick = |f: &dyn Fn(&MetricsRecord) -> f64| -> (f64, f64) {
                let mean = ok.iter().map(|m| f(m)).sum::<f64>() / count;
                let var = if ok.len() > 1 {
                    ok.iter().map(|m| (f(m) - mean).powi(2)).sum::<f64>() / (ok.len() - 1) as f64
                } else {
                    0.0
                };
                (mean, var)
            };
            let (tpr, tpr_v) = pick(&|m| m.tpr);
            let (fpr, fpr_v) = pick(&|m| m.fpr);
            let (tdr, tdr_v) = pick(&|m| m.tdr);
            let (acc, acc_v) = pick(&|m| m.acc);
            let (shd, shd_v) = pick(&|m| m.shd as f64);
            let (rt, rt_v) = pick(&|m| m.runtime_ms);
            CellSummary {
                variant,
                p,
                n,
                alpha,
                replicates: group.len(),
                failures: group.len() - ok.len(),
                mean: CellStats { tpr, fpr, tdr, acc, shd, runtime_ms: rt },
                variance: CellStats {
                    tpr: tpr_v,
                    fpr: fpr_v,
                    tdr: tdr_v,
                    acc: acc_v,
                    shd: shd_v,
                    runtime_ms: rt_v,
                },
            }
        })
        .collect()
}

/// Render benchmark rows as the plot-ready CSV document.
pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("variant,p,n,alpha,replicate,tpr,fpr,tdr,acc,shd,runtime_ms,error\n");
    for r in rows {
        match &r.metrics {
            Some(m) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},\n",
                r.variant, r.p, r.n, r.alpha, r.replicate, m.tpr, m.fpr, m.tdr, m.acc, m.shd,
                m.runtime_ms
            )),
            None => out.push_str(&format!(
                "{},{},{},{},{},,,,,,,{}\n",
                r.variant,
                r.p,
                r.n,
                r.alpha,
                r.replicate,
                r.error.as_deref().unwrap_or("failed").replace(',', ";")
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeKind;

    fn g(labels: &[&str]) -> MixedGraph {
        MixedGraph::new(labels.to_vec()).unwrap()
    }

    #[test]
    fn shd_basics() {
        let mut a = g(&["a", "b"]);
        a.set_edge(0, 1, EdgeKind::Directed).unwrap();
        let empty = g(&["a", "b"]);
        let mut bi = g(&["a", "b"]);
        bi.set_edge(0, 1, EdgeKind::Bidirected).unwrap();

        assert_eq!(shd(&a, &a).unwrap(), 0);
        assert_eq!(shd(&a, &empty).unwrap(), 1); // single delete
        assert_eq!(shd(&a, &bi).unwrap(), 1); // single orientation change
        assert_eq!(shd(&a, &bi).unwrap(), shd(&bi, &a).unwrap());
        assert!(shd(&a, &g(&["x", "y"])).is_err());
    }

    #[test]
    fn metrics_identity_and_empty() {
        let mut truth = g(&["a", "b", "c"]);
        truth.set_edge(0, 1, EdgeKind::Directed).unwrap();
        truth.set_edge(1, 2, EdgeKind::Directed).unwrap();
        let m = metrics(&truth, &truth, 1.0).unwrap();
        assert_eq!((m.tpr, m.fpr, m.tdr, m.acc, m.shd), (1.0, 0.0, 1.0, 1.0, 0));
        assert!(!m.degenerate);

        let learned = g(&["a", "b", "c"]);
        let m = metrics(&learned, &truth, 1.0).unwrap();
        assert_eq!(m.tpr, 0.0);
        assert_eq!(m.fpr, 0.0);
        assert_eq!(m.tdr, 1.0); // guarded: no learned edges
        assert_eq!(m.shd, 2);
        assert!((m.acc - 1.0 / 3.0).abs() < 1e-12);
        assert!(m.degenerate);
    }

    #[test]
    fn metrics_orientation_error_keeps_skeleton_rates() {
        let mut truth = g(&["a", "b"]);
        truth.set_edge(0, 1, EdgeKind::Directed).unwrap();
        let mut learned = g(&["a", "b"]);
        learned.set_edge(0, 1, EdgeKind::Undirected).unwrap();
        let m = metrics(&learned, &truth, 0.0).unwrap();
        assert_eq!((m.tpr, m.fpr, m.shd), (1.0, 0.0, 1));
    }

    #[test]
    fn essential_graph_of_colliderless_dag_is_skeleton() {
        let mut dag = g(&["a", "b", "c"]);
        dag.set_edge(0, 1, EdgeKind::Directed).unwrap();
        dag.set_edge(1, 2, EdgeKind::Directed).unwrap();
        let e = essential_graph(&dag).unwrap();
        assert_eq!(e, dag.skeleton());
    }

    #[test]
    fn essential_graph_keeps_collider_and_closure() {
        // a->c<-b plus c->d: the collider stays, R1 orients c->d.
        let mut dag = g(&["a", "b", "c", "d"]);
        dag.set_edge(0, 2, EdgeKind::Directed).unwrap();
        dag.set_edge(1, 2, EdgeKind::Directed).unwrap();
        dag.set_edge(2, 3, EdgeKind::Directed).unwrap();
        let e = essential_graph(&dag).unwrap();
        assert_eq!(e.edge_kind(0, 2), Some(EdgeKind::Directed));
        assert_eq!(e.edge_kind(1, 2), Some(EdgeKind::Directed));
        assert_eq!(e.edge_kind(2, 3), Some(EdgeKind::Directed));
    }

    #[test]
    fn essential_graph_is_idempotent_on_class() {
        // Markov equivalent inputs give identical essential graphs.
        let mut m1 = g(&["a", "b", "c"]);
        m1.set_edge(0, 1, EdgeKind::Directed).unwrap();
        m1.set_edge(1, 2, EdgeKind::Directed).unwrap();
        let mut m2 = g(&["a", "b", "c"]);
        m2.set_edge(1, 0, EdgeKind::Directed).unwrap();
        m2.set_edge(1, 2, EdgeKind::Directed).unwrap();
        assert_eq!(essential_graph(&m1).unwrap(), essential_graph(&m2).unwrap());
    }

    #[test]
    fn oracle_benchmark_cell_has_zero_shd() {
        let grid = BenchGrid {
            p_values: vec![6],
            n_values: vec![100],
            alpha_values: vec![0.01],
            expected_degree: 2.0,
            replicates: 2,
            variants: vec![Variant::Original, Variant::StableLmpc],
            base_seed: 5,
            oracle: true,
        };
        let out = run_benchmark(&grid).unwrap();
        assert_eq!(out.rows.len(), 4);
        for row in &out.rows {
            let m = row.metrics.as_ref().expect("oracle replicate succeeds");
            assert_eq!(m.shd, 0, "variant {} replicate {}", row.variant, row.replicate);
        }
        for cell in &out.cells {
            assert_eq!(cell.mean.shd, 0.0);
            assert_eq!(cell.failures, 0);
        }
    }

    #[test]
    fn benchmark_is_deterministic() {
        let grid = BenchGrid {
            p_values: vec![5],
            n_values: vec![200],
            alpha_values: vec![0.05],
            expected_degree: 1.5,
            replicates: 2,
            variants: vec![Variant::Stable],
            base_seed: 11,
            oracle: false,
        };
        let a = run_benchmark(&grid).unwrap();
        let b = run_benchmark(&grid).unwrap();
        // Everything except the wall-clock column is a pure function of the
        // grid.
        let strip = |csv: &str| {
            csv.lines()
                .map(|l| l.split(',').take(10).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&rows_to_csv(&a.rows)), strip(&rows_to_csv(&b.rows)));
        let structural = |cells: &[CellSummary]| {
            cells
                .iter()
                .map(|c| (c.variant.clone(), c.p, c.n, c.mean.shd, c.mean.tpr, c.failures))
                .collect::<Vec<_>>()
        };
        assert_eq!(structural(&a.cells), structural(&b.cells));
    }
}
