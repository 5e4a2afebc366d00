//! The batch-assignment anticlustering loop and its hierarchical wrapper.
//!
//! The first batch seeds one anticluster per object. Every later batch
//! becomes a rectangular max-cost assignment of objects to anticluster
//! centroids (squared Euclidean distances), after which each receiving
//! centroid is updated as a running mean. With categories active, cost
//! entries that would push a per-category tally past its ceiling are masked
//! with a sentinel low enough that the solver only ever selects one when no
//! unmasked perfect assignment exists.
//!
//! For large K, [`run_hierarchical`] applies the same construction
//! recursively with branching factors K₁…K_L (product K), which replaces one
//! O(N·K²) pass by L passes of O(N·K_ℓ²) and lets the independent
//! subproblems run in parallel.

use crate::accum;
use crate::assignment::{solve_max_assignment, AssignmentError, CostMatrix};
use crate::dataset::{CategorySpec, FeatureMatrix};
use crate::ordering::{
    build_base_batches, build_interleaved_batches, compute_global_ordering, squared_euclidean,
    validate_plan, BatchPlan, OrderingError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("k must be between 1 and {n}, got {k}")]
    KOutOfRange { k: usize, n: usize },
    #[error("batch plan does not match this instance (n={n}, k={k})")]
    PlanMismatch { n: usize, k: usize },
    #[error("category variant requires category labels")]
    MissingCategories,
    #[error("batch {batch} has no feasible category-respecting assignment")]
    InfeasibleMask { batch: usize },
    #[error("hierarchy factor {0} is smaller than 2")]
    FactorTooSmall(usize),
    #[error("hierarchy factors multiply to {k}, which exceeds n={n}")]
    ProductExceedsN { k: usize, n: usize },
    #[error("hierarchy spec {0:?} is malformed")]
    MalformedHierarchy(String),
    #[error("label {label} out of range for k={k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("anticluster {0} is empty")]
    EmptyAnticluster(usize),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
}

/// A length-N label vector with ids in `0..k`; every id occurs at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates that labels stay in range and no anticluster is empty.
    /// Balance is deliberately not enforced here: externally produced
    /// partitions may be unbalanced and are still scoreable.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self, SolverError> {
        if k == 0 {
            return Err(SolverError::KOutOfRange { k, n: labels.len() });
        }
        let mut seen = vec![false; k];
        for &label in &labels {
            if label >= k {
                return Err(SolverError::LabelOutOfRange { label, k });
            }
            seen[label] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(SolverError::EmptyAnticluster(empty));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &label in &self.labels {
            sizes[label] += 1;
        }
        sizes
    }

    /// Member indices per anticluster, ascending within each.
    pub fn cluster_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &label) in self.labels.iter().enumerate() {
            members[label].push(i);
        }
        members
    }
}

/// Running solver state: one centroid and object count per anticluster, plus
/// per-(anticluster, category) tallies when categories are active.
#[derive(Debug, Clone)]
pub struct AnticlusterState {
    dim: usize,
    centroids: Vec<f64>,
    counts: Vec<usize>,
    category_counts: Option<Vec<usize>>,
    category_caps: Vec<usize>,
}

impl AnticlusterState {
    fn new(k: usize, dim: usize, cats: Option<&CategorySpec>) -> Self {
        let (category_counts, category_caps) = match cats {
            Some(c) => {
                let g = c.n_categories();
                let caps = (0..g).map(|gi| c.members(gi).len().div_ceil(k)).collect();
                (Some(vec![0usize; k * g]), caps)
            }
            None => (None, Vec::new()),
        };
        Self {
            dim,
            centroids: vec![0.0; k * dim],
            counts: vec![0; k],
            category_counts,
            category_caps,
        }
    }

    pub fn centroid(&self, k: usize) -> &[f64] {
        &self.centroids[k * self.dim..(k + 1) * self.dim]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Tally of category `g` objects currently in anticluster `k`.
    pub fn category_count(&self, k: usize, g: usize) -> usize {
        let n_g = self.category_caps.len();
        self.category_counts.as_ref().map_or(0, |t| t[k * n_g + g])
    }

    fn would_exceed_cap(&self, k: usize, g: usize) -> bool {
        self.category_count(k, g) + 1 > self.category_caps[g]
    }

    fn insert(&mut self, anticluster: usize, x: &[f64], category: Option<usize>) {
        self.counts[anticluster] += 1;
        let counter = self.counts[anticluster];
        let centroid = &mut self.centroids[anticluster * self.dim..(anticluster + 1) * self.dim];
        update_centroid(counter, centroid, x);
        if let (Some(tallies), Some(g)) = (self.category_counts.as_mut(), category) {
            tallies[anticluster * self.category_caps.len() + g] += 1;
        }
    }
}

/// Folds `x` into a running mean that previously covered `counter - 1`
/// points. `counter` is the count *after* insertion.
///
/// Panics if `counter` is zero or the lengths differ.
pub fn update_centroid(counter: usize, centroid: &mut [f64], x: &[f64]) {
    assert!(counter >= 1, "counter must be at least 1");
    assert_eq!(centroid.len(), x.len(), "dimension mismatch");
    if counter == 1 {
        centroid.copy_from_slice(x);
        return;
    }
    let inv = 1.0 / counter as f64;
    for (c, v) in centroid.iter_mut().zip(x) {
        *c += (v - *c) * inv;
    }
}

/// Runs the batch-assignment loop over a prepared plan and returns the final
/// partition together with the solver state (for centroid inspection).
pub fn run_aba_with_state(
    m: &FeatureMatrix,
    plan: &BatchPlan,
    k: usize,
    cats: Option<&CategorySpec>,
) -> Result<(Partition, AnticlusterState), SolverError> {
    let n = m.n_objects();
    if k < 1 || k > n {
        return Err(SolverError::KOutOfRange { k, n });
    }
    if !validate_plan(plan, n, k) {
        return Err(SolverError::PlanMismatch { n, k });
    }
    if plan.variant == crate::ordering::Variant::Category && cats.is_none() {
        return Err(SolverError::MissingCategories);
    }

    let dim = m.n_features();
    let mut state = AnticlusterState::new(k, dim, cats);
    let mut labels = vec![0usize; n];

    // First batch: one object per anticluster, centroids seeded directly.
    for (j, &obj) in plan.batches[0].iter().enumerate() {
        labels[obj] = j;
        state.insert(j, m.row(obj), cats.map(|c| c.category_of(obj)));
    }

    for (batch_idx, batch) in plan.batches.iter().enumerate().skip(1) {
        let rows = batch.len();
        let mut costs = vec![0.0; rows * k];
        {
            let centroids = &state.centroids;
            accum::fill_rows(&mut costs, k, |j, row| {
                let x = m.row(batch[j]);
                for (target, centroid) in row.iter_mut().zip(centroids.chunks_exact(dim)) {
                    *target = squared_euclidean(x, centroid);
                }
            });
        }

        let mut masked: Option<Vec<bool>> = None;
        if let Some(c) = cats {
            let max_entry = costs.iter().cloned().fold(0.0f64, f64::max);
            // Low enough that any assignment avoiding sentinels beats any
            // assignment using one, not merely entry-wise dominance: a single
            // masked pick could otherwise be bought back by gains elsewhere
            // in the same batch.
            let sentinel = -(1.0 + rows as f64 * max_entry);
            let mut mask = vec![false; rows * k];
            for (j, &obj) in batch.iter().enumerate() {
                let g = c.category_of(obj);
                for target in 0..k {
                    if state.would_exceed_cap(target, g) {
                        costs[j * k + target] = sentinel;
                        mask[j * k + target] = true;
                    }
                }
            }
            masked = Some(mask);
        }

        let matrix = CostMatrix::from_vec(rows, k, costs)?;
        let assignment = solve_max_assignment(&matrix)?;
        if let Some(mask) = &masked {
            for (j, &col) in assignment.column_of_row.iter().enumerate() {
                if mask[j * k + col] {
                    return Err(SolverError::InfeasibleMask { batch: batch_idx });
                }
            }
        }

        for (j, &col) in assignment.column_of_row.iter().enumerate() {
            let obj = batch[j];
            labels[obj] = col;
            state.insert(col, m.row(obj), cats.map(|c| c.category_of(obj)));
        }
    }

    let partition = Partition { labels, k };
    Ok((partition, state))
}

/// Runs the batch-assignment loop over a prepared plan.
pub fn run_aba(
    m: &FeatureMatrix,
    plan: &BatchPlan,
    k: usize,
    cats: Option<&CategorySpec>,
) -> Result<Partition, SolverError> {
    run_aba_with_state(m, plan, k, cats).map(|(p, _)| p)
}

/// How each (sub)problem picks its batch construction. `Auto` switches to
/// interleaving when anticlusters are small (N/K ≤ 8), where spreading each
/// batch across the full distance range pays off most.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantSelector {
    Base,
    Interleaved,
    Auto,
}

impl VariantSelector {
    pub fn build_plan(
        self,
        o: &crate::ordering::GlobalOrdering,
        k: usize,
    ) -> Result<BatchPlan, OrderingError> {
        let n = o.sorted_indices.len();
        match self {
            VariantSelector::Base => build_base_batches(o, k),
            VariantSelector::Interleaved => build_interleaved_batches(o, k),
            VariantSelector::Auto => {
                if n <= 8 * k {
                    build_interleaved_batches(o, k)
                } else {
                    build_base_batches(o, k)
                }
            }
        }
    }
}

/// Ordered branching factors K₁…K_L, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyPlan {
    factors: Vec<usize>,
}

impl HierarchyPlan {
    pub fn new(factors: Vec<usize>) -> Result<Self, SolverError> {
        if factors.is_empty() {
            return Err(SolverError::MalformedHierarchy("no factors".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&f| f < 2) {
            return Err(SolverError::FactorTooSmall(bad));
        }
        Ok(Self { factors })
    }

    /// Parses specs like `"40x125"` or `"2x200x200"`.
    pub fn parse(spec: &str) -> Result<Self, SolverError> {
        let factors: Vec<usize> = spec
            .split('x')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| SolverError::MalformedHierarchy(spec.to_owned()))
            })
            .collect::<Result<_, _>>()?;
        Self::new(factors)
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn levels(&self) -> usize {
        self.factors.len()
    }

    pub fn total_k(&self) -> usize {
        self.factors.iter().product()
    }
}

/// Factors `k` into (up to) `levels` integers with product exactly `k`, each
/// as close to k^(1/levels) as the divisor lattice allows; the sum of squared
/// factors drives the assignment cost, so balanced factors run fastest. Falls
/// back to fewer levels when `k` has no suitable divisor (e.g. primes).
pub fn balanced_plan(k: usize, levels: usize) -> HierarchyPlan {
    assert!(k >= 2, "k must be at least 2");
    assert!(levels >= 1, "levels must be at least 1");
    let mut factors = Vec::with_capacity(levels);
    let mut remaining = k;
    for levels_left in (1..=levels).rev() {
        if levels_left == 1 {
            factors.push(remaining);
            break;
        }
        let root = (remaining as f64).powf(1.0 / levels_left as f64);
        // Divisor d must leave at least one further factor >= 2.
        let best = (2..=remaining / 2)
            .filter(|d| remaining.is_multiple_of(*d))
            .min_by(|a, b| {
                let da = (*a as f64 - root).abs();
                let db = (*b as f64 - root).abs();
                da.partial_cmp(&db).unwrap().then_with(|| a.cmp(b))
            });
        match best {
            Some(d) => {
                factors.push(d);
                remaining /= d;
            }
            None => {
                factors.push(remaining);
                break;
            }
        }
    }
    HierarchyPlan { factors }
}

/// Recursively partitions with the plan's branching factors: level 1 solves
/// the full instance with K₁ groups, then each group is solved independently
/// (and possibly in parallel) with the remaining factors on its own rows.
/// Leaves are numbered depth-first, parent-major, so the output is identical
/// however the subproblems are scheduled.
pub fn run_hierarchical(
    m: &FeatureMatrix,
    hp: &HierarchyPlan,
    selector: VariantSelector,
) -> Result<Partition, SolverError> {
    let n = m.n_objects();
    let k = hp.total_k();
    if k > n {
        return Err(SolverError::ProductExceedsN { k, n });
    }
    let labels = solve_level(m, hp.factors(), selector)?;
    Ok(Partition { labels, k })
}

fn solve_level(
    m: &FeatureMatrix,
    factors: &[usize],
    selector: VariantSelector,
) -> Result<Vec<usize>, SolverError> {
    let k = factors[0];
    let ordering = compute_global_ordering(m);
    let plan = selector.build_plan(&ordering, k)?;
    let partition = run_aba(m, &plan, k, None)?;
    let rest = &factors[1..];
    if rest.is_empty() {
        return Ok(partition.labels);
    }

    let rest_k: usize = rest.iter().product();
    let groups = partition.cluster_members();
    let solved: Vec<Result<Vec<usize>, SolverError>> = accum::collect_indexed(groups.len(), |gi| {
        let sub = m.select_rows(&groups[gi]);
        solve_level(&sub, rest, selector)
    });

    let mut labels = vec![0usize; m.n_objects()];
    for (gi, (members, result)) in groups.iter().zip(solved).enumerate() {
        let sub_labels = result?;
        for (pos, &orig) in members.iter().enumerate() {
            labels[orig] = gi * rest_k + sub_labels[pos];
        }
    }
    Ok(labels)
}
