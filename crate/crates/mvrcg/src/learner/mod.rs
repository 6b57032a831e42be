//! PC-like structure learning for MVR chain graphs, in every variant: the
//! order-dependent original, the stable (order-independent) skeleton, the
//! conservative and majority-rule triple classifications that mark ambiguous
//! triples instead of forcing orientations, and list-based rule application
//! that removes the last ordering dependence.

mod junction;
mod rules;
mod triples;

pub use junction::orient_remaining_undirected;
pub use rules::{apply_rules_lists, apply_rules_sequential};
pub use triples::{
    classify_triples, labels_from_sepsets, orient_colliders, vstructures_plain, TripleLabel,
    TripleStatus,
};

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::citest::CiTester;
use crate::graph::{GraphError, MixedGraph};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("undirected part of the essential graph is not chordal")]
    NonChordal,
    #[error("orientation produced an inconsistent graph: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Symmetric map from removed pairs to the separating set that removed them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    entries: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `S_uv = S_vu = s`; the set is stored sorted and must exclude
    /// both endpoints.
    pub fn insert(&mut self, u: usize, v: usize, mut s: Vec<usize>) -> Result<(), LearnError> {
        if u == v || s.contains(&u) || s.contains(&v) {
            return Err(LearnError::Config(format!(
                "separating set for ({u}, {v}) must exclude the pair"
            )));
        }
        s.sort_unstable();
        self.entries.insert((u.min(v), u.max(v)), s);
        Ok(())
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&Vec<usize>> {
        self.entries.get(&(u.min(v), u.max(v)))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SkeletonMode {
    Original,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TripleMode {
    Plain,
    Conservative,
    Majority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleMode {
    Sequential,
    List,
}

/// The five named algorithm variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Original,
    Stable,
    StableCpc,
    StableMpc,
    StableLcpc,
    StableLmpc,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Original,
        Variant::Stable,
        Variant::StableCpc,
        Variant::StableMpc,
        Variant::StableLcpc,
        Variant::StableLmpc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Stable => "stable",
            Variant::StableCpc => "stable-cpc",
            Variant::StableMpc => "stable-mpc",
            Variant::StableLcpc => "stable-lcpc",
            Variant::StableLmpc => "stable-lmpc",
        }
    }

    pub fn modes(self) -> (SkeletonMode, TripleMode, RuleMode) {
        match self {
            Variant::Original => (SkeletonMode::Original, TripleMode::Plain, RuleMode::Sequential),
            Variant::Stable => (SkeletonMode::Stable, TripleMode::Plain, RuleMode::Sequential),
            Variant::StableCpc => {
                (SkeletonMode::Stable, TripleMode::Conservative, RuleMode::Sequential)
            }
            Variant::StableMpc => (SkeletonMode::Stable, TripleMode::Majority, RuleMode::Sequential),
            Variant::StableLcpc => (SkeletonMode::Stable, TripleMode::Conservative, RuleMode::List),
            Variant::StableLmpc => (SkeletonMode::Stable, TripleMode::Majority, RuleMode::List),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected one of {})",
                Variant::ALL.map(|v| v.name()).join(", ")))
    }
}

/// Everything that selects an algorithm variant plus the declared variable
/// ordering. The ordering drives pair/subset scans and sequential rule
/// scans; nothing else.
#[derive(Debug, Clone)]
pub struct LearnerConfig {
    pub skeleton: SkeletonMode,
    pub triples: TripleMode,
    pub rules: RuleMode,
    /// Significance level recorded in diagnostics; the tester owns the one
    /// actually used.
    pub alpha: Option<f64>,
    pub ordering: Vec<usize>,
    /// Majority thresholds in percent, `0 <= lo <= hi <= 100`.
    pub majority_lo: f64,
    pub majority_hi: f64,
}

impl LearnerConfig {
    pub fn for_variant(variant: Variant, p: usize) -> Self {
        let (skeleton, triples, rules) = variant.modes();
        Self {
            skeleton,
            triples,
            rules,
            alpha: None,
            ordering: (0..p).collect(),
            majority_lo: 50.0,
            majority_hi: 50.0,
        }
    }

    pub fn with_ordering(mut self, ordering: Vec<usize>) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn validate(&self, p: usize) -> Result<(), LearnError> {
        let mut seen = vec![false; p];
        if self.ordering.len() != p {
            return Err(LearnError::Config(format!(
                "ordering has {} entries for {p} variables",
                self.ordering.len()
            )));
        }
        for &v in &self.ordering {
            if v >= p || seen[v] {
                return Err(LearnError::Config("ordering is not a permutation".into()));
            }
            seen[v] = true;
        }
        if !(0.0 <= self.majority_lo
            && self.majority_lo <= self.majority_hi
            && self.majority_hi <= 100.0)
        {
            return Err(LearnError::Config(
                "majority thresholds must satisfy 0 <= lo <= hi <= 100".into(),
            ));
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(LearnError::Config("alpha must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    fn variant_name(&self) -> String {
        for v in Variant::ALL {
            if v.modes() == (self.skeleton, self.triples, self.rules) {
                return v.name().to_string();
            }
        }
        format!("custom({:?}/{:?}/{:?})", self.skeleton, self.triples, self.rules)
    }
}

/// One edge removal during skeleton recovery, in scan order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub level: usize,
    /// Ordered pair as visited: the subset pool came from `ad(u) \ {v}`.
    pub u: usize,
    pub v: usize,
    pub sepset: Vec<usize>,
}

/// Run log of a learner invocation. Serializes to the diagnostics JSON
/// document.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub variant: String,
    pub alpha: Option<f64>,
    pub ordering: Vec<String>,
    pub tests_performed: u64,
    pub removals_per_level: Vec<usize>,
    pub ambiguous_triples: Vec<[String; 3]>,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub removals: Vec<Removal>,
}

/// Output of [`learn`]: the essential-stage graph (which may carry all three
/// edge kinds plus ambiguity marks), the fully oriented MVR CG, and the run
/// record.
#[derive(Debug, Clone)]
pub struct LearnResult {
    pub essential: MixedGraph,
    pub final_cg: MixedGraph,
    pub sepsets: SepsetMap,
    pub triple_labels: Vec<TripleLabel>,
    pub ambiguous: Vec<(usize, usize, usize)>,
    pub diagnostics: Diagnostics,
}

fn ordered_pairs(ordering: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(ordering.len() * ordering.len());
    for &u in ordering {
        for &v in ordering {
            if u != v {
                pairs.push((u, v));
            }
        }
    }
    pairs
}

fn rank_of(ordering: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; ordering.len()];
    for (i, &v) in ordering.iter().enumerate() {
        rank[v] = i;
    }
    rank
}

fn skeleton_recovery(
    tester: &dyn CiTester,
    labels: &[String],
    ordering: &[usize],
    stable: bool,
) -> Result<(MixedGraph, SepsetMap, Vec<Removal>), LearnError> {
    let p = labels.len();
    let mut h = MixedGraph::complete_undirected(labels.to_vec())?;
    let mut sepsets = SepsetMap::new();
    let mut removals = Vec::new();
    if p < 2 {
        return Ok((h, sepsets, removals));
    }
    let rank = rank_of(ordering);
    let pairs = ordered_pairs(ordering);

    for level in 0..=(p - 2) {
        // Stable mode freezes every adjacency set at the start of the level;
        // removals still hit the working graph immediately, so a removed
        // pair is not retested, but candidate pools stay fixed.
        let frozen: Option<Vec<Vec<usize>>> = if stable {
            Some(
                (0..p)
                    .map(|v| {
                        let mut adj = h.adjacency_set(v).unwrap();
                        adj.sort_unstable_by_key(|&w| rank[w]);
                        adj
                    })
                    .collect(),
            )
        } else {
            None
        };

        let mut any_eligible = false;
        for &(u, v) in &pairs {
            if !h.has_edge(u, v) {
                continue;
            }
            let pool: Vec<usize> = match &frozen {
                Some(f) => f[u].iter().copied().filter(|&w| w != v).collect(),
                None => {
                    let mut adj: Vec<usize> = h
                        .adjacency_set(u)
                        .unwrap()
                        .into_iter()
                        .filter(|&w| w != v)
                        .collect();
                    adj.sort_unstable_by_key(|&w| rank[w]);
                    adj
                }
            };
            if pool.len() < level {
                continue;
            }
            any_eligible = true;
            for subset in pool.iter().copied().combinations(level) {
                if tester.test(u, v, &subset).independent {
                    sepsets.insert(u, v, subset.clone())?;
                    h.remove_edge(u, v)?;
                    let mut sepset = subset;
                    sepset.sort_unstable();
                    removals.push(Removal { level, u, v, sepset });
                    break;
                }
            }
        }
        if !any_eligible {
            break;
        }
    }
    Ok((h, sepsets, removals))
}

/// Skeleton recovery of the original PC-like algorithm: ordered pairs are
/// scanned in the given ordering, subset pools are the current adjacency
/// sets, and every removal takes effect immediately. Order-dependent on
/// sample data.
pub fn skeleton_original(
    tester: &dyn CiTester,
    labels: &[String],
    ordering: &[usize],
) -> Result<(MixedGraph, SepsetMap, Vec<Removal>), LearnError> {
    skeleton_recovery(tester, labels, ordering, false)
}

/// Stable skeleton recovery: adjacency sets are frozen per conditioning-set
/// size, so the removed edge set is the same under every ordering.
pub fn skeleton_stable(
    tester: &dyn CiTester,
    labels: &[String],
    ordering: &[usize],
) -> Result<(MixedGraph, SepsetMap, Vec<Removal>), LearnError> {
    skeleton_recovery(tester, labels, ordering, true)
}

/// Run the configured pipeline: skeleton, triple decisions, orientation
/// rules, then junction-tree orientation of whatever stayed undirected.
pub fn learn(
    tester: &dyn CiTester,
    labels: &[String],
    config: &LearnerConfig,
) -> Result<LearnResult, LearnError> {
    config.validate(labels.len())?;
    let started = Instant::now();
    let calls_before = tester.calls();

    let (skeleton, sepsets, removals) = match config.skeleton {
        SkeletonMode::Original => skeleton_original(tester, labels, &config.ordering)?,
        SkeletonMode::Stable => skeleton_stable(tester, labels, &config.ordering)?,
    };

    let triple_labels = match config.triples {
        TripleMode::Plain => labels_from_sepsets(&skeleton, &sepsets),
        TripleMode::Conservative => classify_triples(&skeleton, tester, 0.0, 100.0),
        TripleMode::Majority => {
            classify_triples(&skeleton, tester, config.majority_lo, config.majority_hi)
        }
    };
    let ambiguous: BTreeSet<(usize, usize, usize)> = triple_labels
        .iter()
        .filter(|l| l.status == TripleStatus::Ambiguous)
        .map(|l| l.triple())
        .collect();

    let mut oriented = skeleton.clone();
    orient_colliders(&mut oriented, &triple_labels);

    let essential = match config.rules {
        RuleMode::Sequential => apply_rules_sequential(&oriented, &ambiguous, &config.ordering),
        RuleMode::List => apply_rules_lists(&oriented, &ambiguous),
    };

    let final_cg = orient_remaining_undirected(&essential)?;
    final_cg
        .validate_mvr_cg()
        .map_err(|e| LearnError::Inconsistent(e.to_string()))?;
    if final_cg.unshielded_colliders() != essential.unshielded_colliders() {
        return Err(LearnError::Inconsistent(
            "final orientation changed the unshielded colliders".into(),
        ));
    }

    let mut removals_per_level = Vec::new();
    for r in &removals {
        if removals_per_level.len() <= r.level {
            removals_per_level.resize(r.level + 1, 0);
        }
        removals_per_level[r.level] += 1;
    }
    let diagnostics = Diagnostics {
        variant: config.variant_name(),
        alpha: config.alpha,
        ordering: config.ordering.iter().map(|&v| labels[v].clone()).collect(),
        tests_performed: tester.calls() - calls_before,
        removals_per_level,
        ambiguous_triples: ambiguous
            .iter()
            .map(|&(i, j, k)| [labels[i].clone(), labels[j].clone(), labels[k].clone()])
            .collect(),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        removals,
    };

    Ok(LearnResult {
        essential,
        final_cg,
        sepsets,
        triple_labels,
        ambiguous: ambiguous.into_iter().collect(),
        diagnostics,
    })
}
