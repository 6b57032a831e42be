//! Gaussian conditional independence via partial correlation.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use super::{CiDecision, CiTester};
use crate::dataset::Dataset;

const CLAMP_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("correlation matrix must be square and match the label count")]
    ShapeMismatch,
    #[error("correlation matrix asymmetric beyond 1e-12 at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("correlation matrix diagonal must be exactly 1 (index {0})")]
    BadDiagonal(usize),
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("significance level must lie in (0, 1)")]
    BadAlpha,
}

/// Sample size plus correlation matrix: everything the Gaussian test needs.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    corr: DMatrix<f64>,
    n: usize,
    labels: Vec<String>,
}

impl SufficientStats {
    pub fn new(corr: DMatrix<f64>, n: usize, labels: Vec<String>) -> Result<Self, StatsError> {
        let p = labels.len();
        if corr.nrows() != p || corr.ncols() != p {
            return Err(StatsError::ShapeMismatch);
        }
        if n < 1 {
            return Err(StatsError::EmptySample);
        }
        for i in 0..p {
            if corr[(i, i)] != 1.0 {
                return Err(StatsError::BadDiagonal(i));
            }
            for j in (i + 1)..p {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-12 {
                    return Err(StatsError::Asymmetric(i, j));
                }
            }
        }
        Ok(Self { corr, n, labels })
    }

    /// Sample correlation of a dataset. Zero-variance columns correlate 0
    /// with everything; the reliability guard in the test catches the rest.
    pub fn from_dataset(data: &Dataset) -> Result<Self, StatsError> {
        let n = data.rows.len();
        if n == 0 {
            return Err(StatsError::EmptyDataset);
        }
        let p = data.labels.len();
        let mut mean = vec![0.0; p];
        for row in &data.rows {
            for (j, &x) in row.iter().enumerate() {
                mean[j] += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for row in &data.rows {
            for i in 0..p {
                for j in i..p {
                    cov[(i, j)] += (row[i] - mean[i]) * (row[j] - mean[j]);
                }
            }
        }
        let mut corr = DMatrix::zeros(p, p);
        for i in 0..p {
            corr[(i, i)] = 1.0;
            for j in (i + 1)..p {
                let denom = (cov[(i, i)] * cov[(j, j)]).sqrt();
                let r = if denom > 0.0 { cov[(i, j)] / denom } else { 0.0 };
                corr[(i, j)] = r;
                corr[(j, i)] = r;
            }
        }
        Self::new(corr, n, data.labels.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }
}

/// Partial correlation of `u` and `v` given `s`, by inverting the
/// correlation submatrix over `{u, v} ∪ s`. Falls back to a pseudo-inverse
/// on singular submatrices; the boolean is false when even that degenerates.
pub fn partial_correlation(
    stats: &SufficientStats,
    u: usize,
    v: usize,
    s: &[usize],
) -> (f64, bool) {
    assert!(u != v && !s.contains(&u) && !s.contains(&v), "u, v must not appear in S");
    let idx: Vec<usize> = [u, v].iter().copied().chain(s.iter().copied()).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| stats.corr[(idx[i], idx[j])]);
    let inv = match sub.clone().try_inverse() {
        Some(m) if m.iter().all(|x| x.is_finite()) => m,
        _ => match sub.pseudo_inverse(1e-12) {
            Ok(m) => m,
            Err(_) => return (0.0, false),
        },
    };
    let denom = inv[(0, 0)] * inv[(1, 1)];
    if !(denom.is_finite() && denom > 0.0) {
        return (0.0, false);
    }
    let rho = -inv[(0, 1)] / denom.sqrt();
    if !rho.is_finite() {
        return (0.0, false);
    }
    (rho.clamp(-1.0 + CLAMP_EPS, 1.0 - CLAMP_EPS), true)
}

/// Fisher-z test: `z = atanh(ρ)`, statistic `sqrt(n - |S| - 3) * |z|`,
/// independent iff the statistic stays at or below the two-sided normal
/// quantile for level `alpha`. Degenerate cases keep the edge.
pub fn fisher_z_test(
    stats: &SufficientStats,
    u: usize,
    v: usize,
    s: &[usize],
    alpha: f64,
) -> CiDecision {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let df = stats.n as i64 - s.len() as i64 - 3;
    if df <= 0 {
        return CiDecision { independent: false, statistic: None, reliable: false };
    }
    let (rho, reliable) = partial_correlation(stats, u, v, s);
    if !reliable {
        return CiDecision { independent: false, statistic: None, reliable: false };
    }
    let z = 0.5 * ((1.0 + rho) / (1.0 - rho)).ln();
    let statistic = (df as f64).sqrt() * z.abs();
    let threshold = Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - alpha / 2.0);
    CiDecision { independent: statistic <= threshold, statistic: Some(statistic), reliable: true }
}

/// Fisher-z tester over fixed sufficient statistics.
pub struct GaussianTester {
    stats: SufficientStats,
    alpha: f64,
    calls: AtomicU64,
}

impl GaussianTester {
    pub fn new(stats: SufficientStats, alpha: f64) -> Result<Self, StatsError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(StatsError::BadAlpha);
        }
        Ok(Self { stats, alpha, calls: AtomicU64::new(0) })
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl CiTester for GaussianTester {
    fn test(&self, u: usize, v: usize, s: &[usize]) -> CiDecision {
        self.calls.fetch_add(1, Ordering::Relaxed);
        fisher_z_test(&self.stats, u, v, s, self.alpha)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}
