//! Clustering back ends and repeated-run aggregation over feature rows.
//!
//! All algorithms are generic over a floating-point scalar and take points
//! as equal-length rows. Distances are Euclidean.

mod eigen;
mod farthest;
mod gmm;
mod kmeans;
mod report;

use std::fmt::{self, Debug};
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::symmetric_eigen;
pub use farthest::{farthest_first, farthest_first_centers};
pub use gmm::{gmm_em, gmm_em_fit, Covariance};
pub use kmeans::{kmeans, kmeans_fit, wcss, KMeansInit};
pub use report::{
    cluster_once, derive_seed, run_repeated, suggest, tally, ClusterReport, CorpusFingerprint, ReportCluster,
    Suggestion,
};

/// Floating-point scalar usable by the clustering algorithms.
pub trait Real: Float + Debug + Send + Sync + 'static {}
impl<T: Float + Debug + Send + Sync + 'static> Real for T {}

pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from(x).expect("constant representable in scalar type")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("granularity {0} is outside 1..=5")]
    BadGranularity(u32),
    #[error("{points} points cannot form {clusters} clusters")]
    TooFewPoints { points: usize, clusters: usize },
    #[error("row {row} has {len} values, expected {expected}")]
    RaggedData { row: usize, len: usize, expected: usize },
    #[error("invalid clustering parameters: {0}")]
    InvalidParams(String),
    #[error("lemma `{0}` is not in the corpus")]
    UnknownLemma(String),
}

/// The five back ends. `label` gives the conventional tool row each one
/// stands in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    KmeansPp,
    KmeansRandom,
    GmmFull,
    GmmDiag,
    FarthestFirst,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::KmeansPp,
        AlgorithmKind::KmeansRandom,
        AlgorithmKind::GmmFull,
        AlgorithmKind::GmmDiag,
        AlgorithmKind::FarthestFirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::KmeansPp => "kmeans-pp",
            AlgorithmKind::KmeansRandom => "kmeans-random",
            AlgorithmKind::GmmFull => "gmm-full",
            AlgorithmKind::GmmDiag => "gmm-diag",
            AlgorithmKind::FarthestFirst => "farthest-first",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AlgorithmKind::KmeansPp => "K-means (Matlab)",
            AlgorithmKind::KmeansRandom => "K-means (Weka)",
            AlgorithmKind::GmmFull => "Gaussian",
            AlgorithmKind::GmmDiag => "Expectation Maximisation",
            AlgorithmKind::FarthestFirst => "FarthestFirst",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Iteration controls shared by the iterative back ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub covariance_floor: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iterations: 100,
            tolerance: 1e-6,
            covariance_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterParams {
    pub algorithm: AlgorithmKind,
    pub granularity: u32,
    pub runs: usize,
    pub master_seed: u64,
    pub freq_threshold: f64,
    pub prox_threshold: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub covariance_floor: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        let limits = Limits::default();
        ClusterParams {
            algorithm: AlgorithmKind::KmeansPp,
            granularity: 3,
            runs: 200,
            master_seed: 0,
            freq_threshold: 0.6,
            prox_threshold: 0.5,
            max_iterations: limits.max_iterations,
            tolerance: limits.tolerance,
            covariance_floor: limits.covariance_floor,
        }
    }
}

impl ClusterParams {
    pub fn limits(&self) -> Limits {
        Limits {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            covariance_floor: self.covariance_floor,
        }
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if !(1..=5).contains(&self.granularity) {
            return Err(ClusterError::BadGranularity(self.granularity));
        }
        let bad = |m: &str| Err(ClusterError::InvalidParams(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.freq_threshold) || !(0.0..=1.0).contains(&self.prox_threshold) {
            return bad("thresholds must lie in [0, 1]");
        }
        if self.max_iterations == 0 {
            return bad("maxIterations must be at least 1");
        }
        if !(self.tolerance >= 0.0) || !(self.covariance_floor > 0.0) {
            return bad("tolerance must be >= 0 and covarianceFloor > 0");
        }
        Ok(())
    }
}

/// `n = max(1, floor(L / (11 - g)))` for granularity `g` in `1..=5`.
pub fn granularity_to_n(corpus_size: usize, granularity: u32) -> Result<usize, ClusterError> {
    if !(1..=5).contains(&granularity) {
        return Err(ClusterError::BadGranularity(granularity));
    }
    if corpus_size == 0 {
        return Err(ClusterError::TooFewPoints { points: 0, clusters: 1 });
    }
    Ok((corpus_size / (11 - granularity as usize)).max(1))
}

/// A hard clustering with compact ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub assignment: Vec<usize>,
    pub n: usize,
    pub proximity: Vec<T>,
}

impl<T: Real> Partition<T> {
    /// Builds a partition from arbitrary labels, renumbering the used
    /// labels `0..n` in increasing order.
    pub fn from_labels(labels: &[usize], points: &[Vec<T>]) -> Self {
        let mut used: Vec<usize> = labels.to_vec();
        used.sort_unstable();
        used.dedup();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| used.binary_search(l).expect("label present"))
            .collect();
        let n = used.len();
        let mut partition = Partition {
            assignment,
            n,
            proximity: Vec::new(),
        };
        partition.proximity = partition.members().iter().map(|m| proximity(m, points)).collect();
        partition
    }

    /// Point indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Result of an iterative fit: the partition, final centers or means, and
/// the per-iteration objective (k-means) or log-likelihood (EM).
#[derive(Debug, Clone)]
pub struct Fit<T> {
    pub partition: Partition<T>,
    pub centers: Vec<Vec<T>>,
    pub trace: Vec<T>,
}

pub(crate) fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Index and squared distance of the nearest center; ties go to the lowest index.
pub(crate) fn nearest<T: Real>(p: &[T], centers: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, sq_dist(p, &centers[0]));
    for (j, c) in centers.iter().enumerate().skip(1) {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Checks shape preconditions and returns the dimension.
pub(crate) fn check_input<T>(points: &[Vec<T>], n: usize) -> Result<usize, ClusterError> {
    if n == 0 {
        return Err(ClusterError::InvalidParams("cluster count must be at least 1".into()));
    }
    if points.len() < n {
        return Err(ClusterError::TooFewPoints {
            points: points.len(),
            clusters: n,
        });
    }
    let d = points[0].len();
    if let Some((row, p)) = points.iter().enumerate().find(|(_, p)| p.len() != d) {
        return Err(ClusterError::RaggedData {
            row,
            len: p.len(),
            expected: d,
        });
    }
    Ok(d)
}

/// `1 / (1 + mean pairwise Euclidean distance)` of the given points; 1 for
/// a singleton.
///
/// # Panics
///
/// Panics if `members` is empty.
pub fn proximity<T: Real>(members: &[usize], points: &[Vec<T>]) -> T {
    assert!(!members.is_empty(), "proximity of an empty cluster");
    let mut total = T::zero();
    let mut pairs = 0usize;
    for (k, &i) in members.iter().enumerate() {
        for &j in &members[k + 1..] {
            total = total + sq_dist(&points[i], &points[j]).sqrt();
            pairs += 1;
        }
    }
    if pairs == 0 {
        return T::one();
    }
    T::one() / (T::one() + total / real(pairs as f64))
}
