//! Assignment-based anticlustering for Euclidean data.
//!
//! Partitions N points in D-dimensional space into K groups of (near-)equal
//! size so that the sum of pairwise squared Euclidean distances *within*
//! groups is maximized — every group ends up looking like a miniature of the
//! whole dataset. The construction assigns distance-sorted batches of objects
//! to group centroids by solving a sequence of rectangular max-cost linear
//! assignment problems, updating centroids incrementally after each batch.
//!
//! Modules:
//! - [`dataset`]: CSV ingestion and preprocessing (standardize, one-hot, scale).
//! - [`assignment`]: rectangular max-cost LAP solver plus a factorial oracle.
//! - [`ordering`]: centroid-distance ordering and batch construction for the
//!   base, interleaved, and category-balanced variants.
//! - [`solver`]: the batch-assignment loop, category masking, and hierarchical
//!   decomposition.
//! - [`metrics`]: diversity objectives, dispersion statistics, and cut cost.
//! - [`baselines`]: seeded random partitions (plain and category-stratified).
//!
//! With the default `parallel` feature, distance computations and hierarchical
//! subproblems run on rayon; results are bit-identical to the sequential
//! build and independent of the worker count.

pub mod assignment;
pub mod baselines;
pub mod dataset;
pub mod metrics;
pub mod ordering;
pub mod solver;

mod accum;

pub use assignment::{brute_force_max_assignment, solve_max_assignment, Assignment, CostMatrix};
pub use baselines::{random_partition, random_partition_with_categories};
pub use dataset::{load_csv, one_hot, scale_unit_interval, standardize, write_csv};
pub use dataset::{CategorySpec, Dataset, FeatureMatrix};
pub use metrics::{brute_force_pairwise, evaluate, min_max_ratio, DiversityReport};
pub use ordering::{
    build_base_batches, build_category_batches, build_interleaved_batches, compute_global_ordering,
    squared_euclidean, BatchPlan, GlobalOrdering, Variant,
};
pub use solver::{
    balanced_plan, run_aba, run_hierarchical, update_centroid, HierarchyPlan, Partition,
    VariantSelector,
};
