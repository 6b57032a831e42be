//! Structure learning for multivariate regression chain graphs.
//!
//! MVR chain graphs carry directed and bidirected edges with no partially
//! directed cycle; a bidirected edge stands for one or more hidden common
//! causes. This crate provides the mixed-graph machinery (adjacency,
//! ancestors, chain components, m-separation), conditional-independence
//! testing (exact graphical oracle, Gaussian Fisher-z, scripted judgments),
//! the PC-like learner in its order-dependent and order-independent variants
//! (stable skeleton, conservative/majority triple classification, list-based
//! rule application), synthetic graph and data generation, and evaluation
//! metrics on essential graphs.

pub mod citest;
pub mod dataset;
pub mod evaluate;
pub mod graph;
pub mod learner;
pub mod seeding;
pub mod simulate;

pub use citest::{CachedTester, CiDecision, CiTester, GaussianTester, OracleTester, ScriptedTester, SufficientStats};
pub use dataset::Dataset;
pub use evaluate::{essential_graph, metrics, run_benchmark, shd, BenchGrid, MetricsRecord};
pub use graph::{EdgeKind, GraphError, Mark, MixedGraph, SeparationQuery};
pub use learner::{learn, LearnResult, LearnerConfig, SepsetMap, Variant};
pub use simulate::{cg_to_dag_with_latents, random_mvr_cg, sample_gaussian, GeneratorParams, LatentDag};
