//! Seeded random partitioning baselines.
//!
//! Both constructions satisfy the same hard constraints as the solver
//! output: sizes within one of each other, and (for the stratified variant)
//! per-category counts within one across anticlusters. The generator is
//! ChaCha8 seeded from the given `u64` with a hand-rolled Fisher–Yates
//! shuffle, so a seed maps to the same labels on every platform and release.

use crate::dataset::CategorySpec;
use crate::solver::Partition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("k must be between 1 and {n}, got {k}")]
    KOutOfRange { k: usize, n: usize },
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Uniformly random balanced partition: a shuffled multiset holding
/// ⌈n/k⌉ copies of the first `n mod k` labels and ⌊n/k⌋ of the rest.
pub fn random_partition(n: usize, k: usize, seed: u64) -> Result<Partition, BaselineError> {
    if k < 1 || k > n {
        return Err(BaselineError::KOutOfRange { k, n });
    }
    let floor = n / k;
    let remainder = n % k;
    let mut labels = Vec::with_capacity(n);
    for label in 0..k {
        let copies = if label < remainder { floor + 1 } else { floor };
        labels.extend(std::iter::repeat_n(label, copies));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffle(&mut labels, &mut rng);
    Ok(Partition::from_labels(labels, k).expect("every label occurs by construction"))
}

/// Category-stratified random partition: each category's members are
/// shuffled and dealt round-robin, starting where the previous category
/// stopped. The rotating start offset is what keeps the overall sizes
/// balanced, not just the per-category counts.
pub fn random_partition_with_categories(
    cats: &CategorySpec,
    k: usize,
    seed: u64,
) -> Result<Partition, BaselineError> {
    let n = cats.n_objects();
    if k < 1 || k > n {
        return Err(BaselineError::KOutOfRange { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![0usize; n];
    let mut dealt = 0usize;
    for g in 0..cats.n_categories() {
        let mut members = cats.members(g).to_vec();
        shuffle(&mut members, &mut rng);
        let offset = dealt % k;
        for (t, &obj) in members.iter().enumerate() {
            labels[obj] = (offset + t) % k;
        }
        dealt += members.len();
    }
    Ok(Partition::from_labels(labels, k).expect("round-robin reaches every anticluster"))
}
