//! Conditional-independence decision sources.
//!
//! Everything the learner asks goes through [`CiTester`]: an exact graphical
//! oracle, the Gaussian partial-correlation test, or a scripted judgment list
//! for reproducing worked examples. A cache wrapper keys queries
//! symmetrically so repeated tests are answered once.

mod gaussian;

pub use gaussian::{partial_correlation, GaussianTester, SufficientStats, StatsError};

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::graph::{GraphError, MixedGraph};

/// Outcome of one conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiDecision {
    pub independent: bool,
    /// Test statistic; absent for oracle and scripted decisions.
    pub statistic: Option<f64>,
    /// False only when the sample was too degenerate to test; such queries
    /// are reported dependent so the edge is kept.
    pub reliable: bool,
}

impl CiDecision {
    pub fn exact(independent: bool) -> Self {
        Self { independent, statistic: None, reliable: true }
    }
}

#[derive(Debug, Error)]
pub enum CiError {
    #[error("conflicting override for ({u}, {v} | {s:?})")]
    ConflictingOverride { u: String, v: String, s: Vec<String> },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A conditional-independence decision source.
///
/// Implementations must be symmetric in `u` and `v` and must answer repeated
/// identical queries identically. `calls` tallies evaluations for
/// benchmarking and may be reconciled at synchronization points under
/// contention.
pub trait CiTester: Send + Sync {
    fn test(&self, u: usize, v: usize, s: &[usize]) -> CiDecision;
    fn calls(&self) -> u64;
}

fn canonical_key(u: usize, v: usize, s: &[usize]) -> (usize, usize, Vec<usize>) {
    let mut s = s.to_vec();
    s.sort_unstable();
    (u.min(v), u.max(v), s)
}

/// Exact oracle answering with m-separation in a fixed MVR CG (or DAG).
pub struct OracleTester {
    truth: MixedGraph,
    calls: AtomicU64,
}

impl OracleTester {
    pub fn new(truth: MixedGraph) -> Result<Self, CiError> {
        truth.validate_mvr_cg().map_err(GraphError::from)?;
        Ok(Self { truth, calls: AtomicU64::new(0) })
    }

    pub fn truth(&self) -> &MixedGraph {
        &self.truth
    }
}

impl CiTester for OracleTester {
    fn test(&self, u: usize, v: usize, s: &[usize]) -> CiDecision {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let sep = self
            .truth
            .m_separated_pair(u, v, s)
            .expect("oracle query must be valid");
        CiDecision::exact(sep)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Wraps a base tester with a list of overriding judgments; exact query
/// matches (unordered pair, set-valued conditioning set) take the scripted
/// decision, everything else delegates.
pub struct ScriptedTester {
    base: Box<dyn CiTester>,
    overrides: HashMap<(usize, usize, Vec<usize>), bool>,
    calls: AtomicU64,
}

impl ScriptedTester {
    pub fn new(
        base: Box<dyn CiTester>,
        overrides: Vec<(usize, usize, Vec<usize>, bool)>,
    ) -> Result<Self, CiError> {
        let mut map = HashMap::new();
        for (u, v, s, dec) in overrides {
            let key = canonical_key(u, v, &s);
            if let Some(&prev) = map.get(&key) {
                if prev != dec {
                    return Err(CiError::ConflictingOverride {
                        u: key.0.to_string(),
                        v: key.1.to_string(),
                        s: key.2.iter().map(|i| i.to_string()).collect(),
                    });
                }
            }
            map.insert(key, dec);
        }
        Ok(Self { base, overrides: map, calls: AtomicU64::new(0) })
    }

    /// Script over an oracle for a truth graph.
    pub fn over_oracle(
        truth: MixedGraph,
        overrides: Vec<(usize, usize, Vec<usize>, bool)>,
    ) -> Result<Self, CiError> {
        Self::new(Box::new(OracleTester::new(truth)?), overrides)
    }
}

impl CiTester for ScriptedTester {
    fn test(&self, u: usize, v: usize, s: &[usize]) -> CiDecision {
        self.calls.fetch_add(1, Ordering::Relaxed);
        match self.overrides.get(&canonical_key(u, v, s)) {
            Some(&dec) => CiDecision::exact(dec),
            None => self.base.test(u, v, s),
        }
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Memoizing wrapper. Decisions are unchanged; only the inner tester's call
/// count shrinks to the number of distinct queries.
pub struct CachedTester<T: CiTester> {
    inner: T,
    cache: Mutex<HashMap<(usize, usize, Vec<usize>), CiDecision>>,
    calls: AtomicU64,
}

impl<T: CiTester> CachedTester<T> {
    pub fn new(inner: T) -> Self {
        Self { inner, cache: Mutex::new(HashMap::new()), calls: AtomicU64::new(0) }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: CiTester> CiTester for CachedTester<T> {
    fn test(&self, u: usize, v: usize, s: &[usize]) -> CiDecision {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let key = canonical_key(u, v, s);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return *hit;
        }
        let decision = self.inner.test(u, v, s);
        self.cache.lock().unwrap().insert(key, decision);
        decision
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}
