//! Distance-to-centroid ordering and batch construction.
//!
//! Objects are sorted by decreasing squared distance to the global centroid
//! and cut into ⌈N/K⌉ batches of K (last one possibly short). The base
//! builder slices the sorted list directly, so each batch holds objects of
//! similar centrality. The interleaved builder rearranges the list so every
//! batch spans the full range of centralities, which works better when
//! anticlusters are small. The category builder groups the sorted list into
//! single-category blocks of K so category counts stay balanced.

use crate::dataset::{CategorySpec, FeatureMatrix};
use crate::{accum, solver::Partition};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrderingError {
    #[error("k must be between 1 and {n}, got {k}")]
    KOutOfRange { k: usize, n: usize },
    #[error("category spec covers {got} objects, expected {expected}")]
    CategorySizeMismatch { got: usize, expected: usize },
}

/// Squared Euclidean distance between two equal-length vectors.
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let diff = x - y;
            diff * diff
        })
        .sum()
}

/// The global centroid, each object's squared distance to it, and the object
/// indices sorted by that distance in descending order (ties by ascending
/// index).
#[derive(Debug, Clone)]
pub struct GlobalOrdering {
    pub global_centroid: Vec<f64>,
    pub distances: Vec<f64>,
    pub sorted_indices: Vec<usize>,
}

pub fn compute_global_ordering(m: &FeatureMatrix) -> GlobalOrdering {
    let n = m.n_objects();
    let d = m.n_features();
    let mut centroid = accum::column_sums(m.values(), d);
    for c in &mut centroid {
        *c /= n as f64;
    }
    let mut distances = vec![0.0; n];
    accum::fill_indexed(&mut distances, |i| squared_euclidean(m.row(i), &centroid));

    let mut sorted_indices: Vec<usize> = (0..n).collect();
    // Comparator is a total order (distance desc, index asc), so the result
    // is the same permutation no matter how the sort is scheduled.
    sort_indices(&mut sorted_indices, &distances);
    GlobalOrdering {
        global_centroid: centroid,
        distances,
        sorted_indices,
    }
}

fn sort_indices(indices: &mut [usize], distances: &[f64]) {
    let cmp = |a: &usize, b: &usize| {
        distances[*b]
            .partial_cmp(&distances[*a])
            .expect("distances are finite")
            .then_with(|| a.cmp(b))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::slice::ParallelSliceMut;
        indices.par_sort_unstable_by(cmp);
    }
    #[cfg(not(feature = "parallel"))]
    {
        indices.sort_unstable_by(cmp);
    }
}

/// Which batch construction produced a [`BatchPlan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Base,
    Interleaved,
    Category,
}

/// Ordered batches ℬ₁…ℬ_B of object indices; every batch except possibly the
/// last has exactly K entries, and the concatenation is a permutation of
/// 0..N.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    pub batches: Vec<Vec<usize>>,
    pub variant: Variant,
}

impl BatchPlan {
    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn n_objects(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }
}

fn check_k(k: usize, n: usize) -> Result<(), OrderingError> {
    if k < 1 || k > n {
        return Err(OrderingError::KOutOfRange { k, n });
    }
    Ok(())
}

fn batches_from_list(list: &[usize], k: usize, variant: Variant) -> BatchPlan {
    BatchPlan {
        batches: list.chunks(k).map(<[usize]>::to_vec).collect(),
        variant,
    }
}

/// Consecutive K-sized slices of the descending-distance list.
pub fn build_base_batches(o: &GlobalOrdering, k: usize) -> Result<BatchPlan, OrderingError> {
    check_k(k, o.sorted_indices.len())?;
    Ok(batches_from_list(&o.sorted_indices, k, Variant::Base))
}

/// Rearranges the sorted list so each batch draws one object from each of K
/// distance strata before batching.
///
/// Divisible N: the list splits into K sublists of length Q = N/K and the
/// rearranged list takes round r from every sublist in order. Otherwise the
/// first ⌈N/K⌉·K − N sublists get length ⌊N/K⌋ and the rest length ⌈N/K⌉;
/// rounds run ⌊N/K⌋ deep and the long sublists' leftover elements (the ones
/// nearest the centroid) are appended at the end, where they form the short
/// final batch.
pub fn build_interleaved_batches(o: &GlobalOrdering, k: usize) -> Result<BatchPlan, OrderingError> {
    let n = o.sorted_indices.len();
    check_k(k, n)?;
    let sorted = &o.sorted_indices;

    let under_q = n / k;
    let bar_q = n.div_ceil(k);
    // Number of sublists of length under_q; the divisible case has no long
    // sublists and therefore no leftover round.
    let n_short = if n.is_multiple_of(k) {
        k
    } else {
        bar_q * k - n
    };
    let rounds = under_q;

    // Sublist s occupies a consecutive slice of the sorted list; the first
    // n_short sublists are the short ones.
    let start_of = |s: usize| -> usize {
        if s <= n_short {
            s * under_q
        } else {
            n_short * under_q + (s - n_short) * bar_q
        }
    };

    let mut rearranged = Vec::with_capacity(n);
    for r in 0..rounds {
        for s in 0..k {
            rearranged.push(sorted[start_of(s) + r]);
        }
    }
    for s in n_short..k {
        rearranged.push(sorted[start_of(s) + rounds]);
    }
    debug_assert_eq!(rearranged.len(), n);
    Ok(batches_from_list(&rearranged, k, Variant::Interleaved))
}

/// Splits the sorted list per category, cuts each category run into K-sized
/// blocks, and emits full blocks round-robin over category ids (skipping
/// exhausted categories) followed by the incomplete blocks in the same
/// order. Every full batch is then single-category, which pins the
/// per-category floor; the solver's cost masking enforces the ceiling over
/// the mixed tail.
pub fn build_category_batches(
    o: &GlobalOrdering,
    k: usize,
    cats: &CategorySpec,
) -> Result<BatchPlan, OrderingError> {
    let n = o.sorted_indices.len();
    check_k(k, n)?;
    if cats.n_objects() != n {
        return Err(OrderingError::CategorySizeMismatch {
            got: cats.n_objects(),
            expected: n,
        });
    }

    let g = cats.n_categories();
    let mut per_category: Vec<Vec<usize>> = vec![Vec::new(); g];
    for &i in &o.sorted_indices {
        per_category[cats.category_of(i)].push(i);
    }

    let mut rearranged = Vec::with_capacity(n);
    let mut block = 0usize;
    loop {
        let mut emitted = false;
        for list in &per_category {
            let start = block * k;
            if start + k <= list.len() {
                rearranged.extend_from_slice(&list[start..start + k]);
                emitted = true;
            }
        }
        if !emitted {
            break;
        }
        block += 1;
    }
    for list in &per_category {
        let tail_start = (list.len() / k) * k;
        rearranged.extend_from_slice(&list[tail_start..]);
    }
    debug_assert_eq!(rearranged.len(), n);
    Ok(batches_from_list(&rearranged, k, Variant::Category))
}

/// Validates the structural batch-plan contract; used by tests and by the
/// solver's entry check.
pub(crate) fn validate_plan(plan: &BatchPlan, n: usize, k: usize) -> bool {
    let b = n.div_ceil(k);
    if plan.batches.len() != b {
        return false;
    }
    for (i, batch) in plan.batches.iter().enumerate() {
        let expected = if i + 1 < b { k } else { n - (b - 1) * k };
        if batch.len() != expected {
            return false;
        }
    }
    let mut seen = vec![false; n];
    for &i in plan.batches.iter().flatten() {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

/// Checks the balanced-size contract: every group size in {⌊N/K⌋, ⌈N/K⌉}
/// and exactly N mod K groups of the larger size.
pub fn sizes_are_balanced(p: &Partition) -> bool {
    let n = p.labels().len();
    let k = p.k();
    let sizes = p.cluster_sizes();
    let floor = n / k;
    let ceil = n.div_ceil(k);
    let larger = sizes.iter().filter(|&&s| s == ceil).count();
    sizes.iter().all(|&s| s == floor || s == ceil) && (n.is_multiple_of(k) || larger == n % k)
}
