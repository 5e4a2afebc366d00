//! Partition scoring: diversity objectives, dispersion statistics, and cut
//! cost.
//!
//! The pairwise within-group objective is never accumulated by double loop
//! here. For a group of size n with centroid μ, the sum of pairwise squared
//! distances equals n · Σ‖xᵢ − μ‖², so one centroid pass per group suffices;
//! [`brute_force_pairwise`] keeps the O(N²) route alive as a test oracle.

use crate::accum;
use crate::dataset::FeatureMatrix;
use crate::ordering::squared_euclidean;
use crate::solver::Partition;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("labels cover {got} objects but the matrix has {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("label {label} out of range for k={k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("anticluster {0} is empty")]
    EmptyAnticluster(usize),
    #[error("brute force pairwise is limited to 5000 objects, got {0}")]
    TooLargeForBruteForce(usize),
}

/// Everything the evaluation reports about one partition. Serialized as the
/// metrics JSON artifact.
#[derive(Debug, Clone, Serialize)]
pub struct DiversityReport {
    /// Within-anticluster sum of pairwise squared distances, W(𝒞).
    pub pairwise_objective: f64,
    /// Σₖ Σ_{i∈𝒞ₖ} ‖xᵢ − μₖ‖² — the objective the result tables report.
    pub centroid_sse_objective: f64,
    /// Per-anticluster centroid-SSE diversity, index = anticluster id.
    pub per_cluster_diversity: Vec<f64>,
    /// Population standard deviation of the K diversity values.
    pub diversity_sd: f64,
    /// max − min of the K diversity values.
    pub diversity_range: f64,
    pub min_size: usize,
    pub max_size: usize,
    /// 100·min/max, reported as 100 when sizes differ by at most one.
    pub min_max_ratio: f64,
    /// Total pairwise sum minus the within-anticluster sum: the weight cut
    /// by the partition boundaries.
    pub cut_cost: f64,
    /// Solve-phase wall clock, filled in by the CLI; absent for re-scored
    /// label files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl DiversityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Scores a partition against its feature matrix.
pub fn evaluate(m: &FeatureMatrix, p: &Partition) -> Result<DiversityReport, MetricsError> {
    let n = m.n_objects();
    let d = m.n_features();
    let k = p.k();
    if p.labels().len() != n {
        return Err(MetricsError::LengthMismatch {
            got: p.labels().len(),
            expected: n,
        });
    }
    if let Some(&label) = p.labels().iter().find(|&&l| l >= k) {
        return Err(MetricsError::LabelOutOfRange { label, k });
    }
    let members = p.cluster_members();
    if let Some(empty) = members.iter().position(Vec::is_empty) {
        return Err(MetricsError::EmptyAnticluster(empty));
    }

    // Per-cluster centroid SSE, members accumulated in ascending index order.
    let per_cluster_diversity: Vec<f64> = accum::collect_indexed(k, |ki| {
        let group = &members[ki];
        let mut centroid = vec![0.0; d];
        for &i in group {
            for (c, v) in centroid.iter_mut().zip(m.row(i)) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= group.len() as f64;
        }
        group
            .iter()
            .map(|&i| squared_euclidean(m.row(i), &centroid))
            .sum()
    });

    let centroid_sse_objective: f64 = per_cluster_diversity.iter().sum();
    let pairwise_objective: f64 = per_cluster_diversity
        .iter()
        .zip(&members)
        .map(|(div, group)| group.len() as f64 * div)
        .sum();

    let mean = centroid_sse_objective / k as f64;
    let variance = per_cluster_diversity
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / k as f64;
    let diversity_sd = variance.sqrt();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &per_cluster_diversity {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let diversity_range = hi - lo;

    // Whole-set identity: total pairwise sum = N · Σᵢ‖xᵢ − μ‖².
    let mut global_centroid = accum::column_sums(m.values(), d);
    for c in &mut global_centroid {
        *c /= n as f64;
    }
    let mut to_centroid = vec![0.0; n];
    accum::fill_indexed(&mut to_centroid, |i| {
        squared_euclidean(m.row(i), &global_centroid)
    });
    let total_pairwise = n as f64 * accum::sum(&to_centroid);
    let cut_cost = total_pairwise - pairwise_objective;

    let sizes = p.cluster_sizes();
    let min_size = *sizes.iter().min().expect("k >= 1");
    let max_size = *sizes.iter().max().expect("k >= 1");

    Ok(DiversityReport {
        pairwise_objective,
        centroid_sse_objective,
        per_cluster_diversity,
        diversity_sd,
        diversity_range,
        min_size,
        max_size,
        min_max_ratio: min_max_ratio(p),
        cut_cost,
        runtime_seconds: None,
    })
}

/// Direct O(N²) within-anticluster pairwise sum; verification oracle.
pub fn brute_force_pairwise(m: &FeatureMatrix, p: &Partition) -> Result<f64, MetricsError> {
    let n = m.n_objects();
    if n > 5000 {
        return Err(MetricsError::TooLargeForBruteForce(n));
    }
    if p.labels().len() != n {
        return Err(MetricsError::LengthMismatch {
            got: p.labels().len(),
            expected: n,
        });
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if p.labels()[i] == p.labels()[j] {
                total += squared_euclidean(m.row(i), m.row(j));
            }
        }
    }
    Ok(total)
}

/// Size-balance ratio in percent: 100·min/max, except that partitions whose
/// sizes differ by at most one count as perfectly balanced (ratio 100).
pub fn min_max_ratio(p: &Partition) -> f64 {
    let sizes = p.cluster_sizes();
    let min = *sizes.iter().min().expect("k >= 1");
    let max = *sizes.iter().max().expect("k >= 1");
    if max - min <= 1 {
        100.0
    } else {
        100.0 * min as f64 / max as f64
    }
}
