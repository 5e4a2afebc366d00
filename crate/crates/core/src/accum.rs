//! Deterministic (optionally parallel) accumulation helpers.
//!
//! Parallel reductions must produce bit-identical results regardless of the
//! worker count, so every helper splits its input into fixed-size chunks,
//! reduces each chunk sequentially, and folds the partial results in chunk
//! order. The sequential build walks the same chunk structure.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per accumulation chunk. Fixed so that chunk boundaries (and therefore
/// floating-point summation order) do not depend on thread count.
const CHUNK_ROWS: usize = 1024;

/// Below this many output elements the per-element helpers stay sequential
/// even in the parallel build: task overhead dwarfs the arithmetic, and the
/// hierarchical solver hits these helpers with thousands of tiny
/// subproblems. Each element is an independent function of its index, so the
/// cutover cannot change any computed value.
#[cfg(feature = "parallel")]
const PAR_MIN_ELEMENTS: usize = 1 << 12;

/// Column-wise sum of a row-major `n x d` matrix.
pub(crate) fn column_sums(values: &[f64], d: usize) -> Vec<f64> {
    assert!(d > 0 && values.len().is_multiple_of(d));
    let partials = map_chunks(values, CHUNK_ROWS * d, |chunk| {
        let mut acc = vec![0.0; d];
        for row in chunk.chunks_exact(d) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc
    });
    let mut total = vec![0.0; d];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Sum of a slice, chunked for determinism.
pub(crate) fn sum(values: &[f64]) -> f64 {
    let partials = map_chunks(values, CHUNK_ROWS, |chunk| chunk.iter().sum::<f64>());
    partials.into_iter().sum()
}

/// Applies `f` to fixed-size chunks of `values`, returning the partial results
/// in chunk order.
fn map_chunks<T, F>(values: &[f64], chunk_len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if values.len() >= PAR_MIN_ELEMENTS {
        return values.par_chunks(chunk_len).map(f).collect();
    }
    values.chunks(chunk_len).map(f).collect()
}

/// Fills `out[i] = f(i)` for `i in 0..out.len()`, in parallel when enabled
/// and the slice is large enough to pay for it. Each element is computed
/// independently, so the result does not depend on scheduling.
pub(crate) fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if out.len() >= PAR_MIN_ELEMENTS {
        out.par_iter_mut().enumerate().for_each(|(i, slot)| {
            *slot = f(i);
        });
        return;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

/// Fills each `row_len`-sized row of `out` via `f(row_index, row)`, in
/// parallel when enabled and the buffer is large enough. Rows are disjoint,
/// so scheduling cannot affect the result.
pub(crate) fn fill_rows<F>(out: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if out.len() >= PAR_MIN_ELEMENTS {
        out.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    out.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// `(0..n).map(f)` collected in index order, in parallel when enabled.
pub(crate) fn collect_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_sums_matches_naive() {
        let d = 3;
        let n = 2500; // spans multiple chunks
        let values: Vec<f64> = (0..n * d).map(|i| (i % 17) as f64 * 0.25).collect();
        let sums = column_sums(&values, d);
        let mut naive = vec![0.0; d];
        for row in values.chunks_exact(d) {
            for (a, v) in naive.iter_mut().zip(row) {
                *a += v;
            }
        }
        assert_eq!(sums, naive);
    }

    #[test]
    fn sum_handles_empty_and_short() {
        assert_eq!(sum(&[]), 0.0);
        assert_eq!(sum(&[1.5, 2.5]), 4.0);
    }
}
