//! Rectangular linear assignment: pick one distinct column per row so the
//! summed cost is maximal.
//!
//! The solver is a shortest-augmenting-path variant of the Jonker-Volgenant
//! algorithm operating directly on rectangular matrices (rows ≤ columns),
//! O(rows² · cols). Maximization is run as minimization on the negated
//! matrix. The scan order is fixed, so cost ties always resolve the same way
//! and the solver is deterministic. [`brute_force_max_assignment`] enumerates
//! all injective row→column maps and exists to cross-check the solver in
//! tests.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("cost matrix has {rows} rows but only {cols} columns")]
    RowsExceedColumns { rows: usize, cols: usize },
    #[error("cost matrix must be non-empty")]
    Empty,
    #[error("cost matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("buffer of {len} values does not match {rows} x {cols}")]
    BadShape {
        len: usize,
        rows: usize,
        cols: usize,
    },
    #[error("brute force supports at most 9 columns, got {0}")]
    TooManyColumnsForBruteForce(usize),
    #[error("cost matrix text is malformed: {0}")]
    Parse(String),
}

/// Dense row-major `n_rows x n_cols` cost matrix with `n_rows <= n_cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n_rows: usize,
    n_cols: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn from_vec(
        n_rows: usize,
        n_cols: usize,
        costs: Vec<f64>,
    ) -> Result<Self, AssignmentError> {
        if n_rows == 0 || n_cols == 0 {
            return Err(AssignmentError::Empty);
        }
        if n_rows > n_cols {
            return Err(AssignmentError::RowsExceedColumns {
                rows: n_rows,
                cols: n_cols,
            });
        }
        if costs.len() != n_rows * n_cols {
            return Err(AssignmentError::BadShape {
                len: costs.len(),
                rows: n_rows,
                cols: n_cols,
            });
        }
        if let Some(pos) = costs.iter().position(|c| !c.is_finite()) {
            return Err(AssignmentError::NonFinite {
                row: pos / n_cols,
                col: pos % n_cols,
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            costs,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AssignmentError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(AssignmentError::Parse("ragged rows".into()));
        }
        Self::from_vec(m, n, rows.concat())
    }

    /// Parses the plain text exchange format: first line `m n`, then `m`
    /// whitespace-separated rows of `n` reals.
    pub fn parse(text: &str) -> Result<Self, AssignmentError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| AssignmentError::Parse("empty input".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| AssignmentError::Parse(format!("bad dimension {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        let [m, n] = dims[..] else {
            return Err(AssignmentError::Parse("header must be \"m n\"".into()));
        };
        let mut costs = Vec::with_capacity(m * n);
        for line in lines.take(m) {
            for t in line.split_whitespace() {
                costs.push(
                    t.parse()
                        .map_err(|_| AssignmentError::Parse(format!("bad value {t:?}")))?,
                );
            }
        }
        Self::from_vec(m, n, costs)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.n_cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.costs[row * self.n_cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.costs[row * self.n_cols..(row + 1) * self.n_cols]
    }

    fn total_of(&self, column_of_row: &[usize]) -> f64 {
        column_of_row
            .iter()
            .enumerate()
            .map(|(r, &c)| self.get(r, c))
            .sum()
    }
}

/// An injective row→column map together with its summed cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub column_of_row: Vec<usize>,
    pub total_cost: f64,
}

const NONE: usize = usize::MAX;

/// Returns the assignment maximizing the summed cost over injective maps
/// from rows to columns. Deterministic, including on cost ties.
pub fn solve_max_assignment(c: &CostMatrix) -> Result<Assignment, AssignmentError> {
    let negated: Vec<f64> = c.costs.iter().map(|v| -v).collect();
    let column_of_row = solve_min_rectangular(c.n_rows, c.n_cols, &negated);
    let total_cost = c.total_of(&column_of_row);
    Ok(Assignment {
        column_of_row,
        total_cost,
    })
}

/// Shortest-augmenting-path LAP minimization on a rectangular matrix with
/// `nr <= nc`. Maintains dual variables `u`, `v` and grows the matching one
/// row at a time along a Dijkstra-style shortest alternating path over
/// reduced costs.
fn solve_min_rectangular(nr: usize, nc: usize, cost: &[f64]) -> Vec<usize> {
    let mut u = vec![0.0; nr];
    let mut v = vec![0.0; nc];
    let mut col_of_row = vec![NONE; nr];
    let mut row_of_col = vec![NONE; nc];

    let mut shortest = vec![f64::INFINITY; nc];
    let mut path = vec![NONE; nc];
    let mut in_tree_row = vec![false; nr];
    let mut in_tree_col = vec![false; nc];
    let mut remaining = vec![0usize; nc];

    for cur_row in 0..nr {
        // Shortest augmenting path from cur_row to an unmatched column.
        let mut num_remaining = nc;
        for (slot, j) in remaining.iter_mut().zip((0..nc).rev()) {
            *slot = j;
        }
        in_tree_row.iter_mut().for_each(|b| *b = false);
        in_tree_col.iter_mut().for_each(|b| *b = false);
        shortest.iter_mut().for_each(|s| *s = f64::INFINITY);

        let mut min_val = 0.0;
        let mut i = cur_row;
        let sink = loop {
            in_tree_row[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index = NONE;
            for (it, &j) in remaining.iter().enumerate().take(num_remaining) {
                let reduced = min_val + cost[i * nc + j] - u[i] - v[j];
                if reduced < shortest[j] {
                    path[j] = i;
                    shortest[j] = reduced;
                }
                // On ties, prefer a column that ends the path at an
                // unmatched sink.
                if shortest[j] < lowest || (shortest[j] == lowest && row_of_col[j] == NONE) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            min_val = lowest;
            debug_assert!(min_val.is_finite(), "finite matrices are always feasible");

            let j = remaining[index];
            in_tree_col[j] = true;
            num_remaining -= 1;
            remaining[index] = remaining[num_remaining];
            if row_of_col[j] == NONE {
                break j;
            }
            i = row_of_col[j];
        };

        u[cur_row] += min_val;
        for r in 0..nr {
            if in_tree_row[r] && r != cur_row {
                u[r] += min_val - shortest[col_of_row[r]];
            }
        }
        for j in 0..nc {
            if in_tree_col[j] {
                v[j] -= min_val - shortest[j];
            }
        }

        // Flip the matching along the augmenting path back to cur_row.
        let mut j = sink;
        loop {
            let r = path[j];
            row_of_col[j] = r;
            std::mem::swap(&mut col_of_row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }
    col_of_row
}

/// Exhaustively enumerates injective row→column maps and returns a maximum.
/// Test oracle only; refuses more than 9 columns.
pub fn brute_force_max_assignment(c: &CostMatrix) -> Result<Assignment, AssignmentError> {
    if c.n_cols > 9 {
        return Err(AssignmentError::TooManyColumnsForBruteForce(c.n_cols));
    }
    let mut best_cols = vec![NONE; c.n_rows];
    let mut best_total = f64::NEG_INFINITY;
    let mut current = vec![NONE; c.n_rows];
    enumerate(
        c,
        0,
        0u16,
        0.0,
        &mut current,
        &mut best_cols,
        &mut best_total,
    );
    Ok(Assignment {
        column_of_row: best_cols,
        total_cost: best_total,
    })
}

fn enumerate(
    c: &CostMatrix,
    row: usize,
    used: u16,
    partial: f64,
    current: &mut [usize],
    best_cols: &mut [usize],
    best_total: &mut f64,
) {
    if row == c.n_rows {
        if partial > *best_total {
            *best_total = partial;
            best_cols.copy_from_slice(current);
        }
        return;
    }
    for col in 0..c.n_cols {
        if used & (1 << col) == 0 {
            current[row] = col;
            enumerate(
                c,
                row + 1,
                used | (1 << col),
                partial + c.get(row, col),
                current,
                best_cols,
                best_total,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_prefers_diagonal() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let a = solve_max_assignment(&c).unwrap();
        assert_eq!(a.column_of_row, vec![0, 1]);
        assert_abs_diff_eq!(a.total_cost, 6.0);
    }

    #[test]
    fn single_row_takes_argmax() {
        let c = CostMatrix::from_rows(&[vec![4.0, 9.0, 2.0]]).unwrap();
        let a = solve_max_assignment(&c).unwrap();
        assert_eq!(a.column_of_row, vec![1]);
        assert_abs_diff_eq!(a.total_cost, 9.0);
    }

    #[test]
    fn degenerate_tie_is_deterministic() {
        let c = CostMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let a = solve_max_assignment(&c).unwrap();
        let b = solve_max_assignment(&c).unwrap();
        assert_abs_diff_eq!(a.total_cost, 0.0);
        assert_eq!(a.column_of_row, b.column_of_row);
        let mut cols = a.column_of_row.clone();
        cols.sort_unstable();
        assert_eq!(cols, vec![0, 1]);
    }

    #[test]
    fn rows_exceeding_columns_rejected() {
        assert!(matches!(
            CostMatrix::from_rows(&[vec![1.0], vec![2.0]]),
            Err(AssignmentError::RowsExceedColumns { rows: 2, cols: 1 })
        ));
    }

    #[test]
    fn brute_force_examples() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        assert_abs_diff_eq!(brute_force_max_assignment(&c).unwrap().total_cost, 6.0);

        let c = CostMatrix::from_rows(&[vec![7.0]]).unwrap();
        assert_abs_diff_eq!(brute_force_max_assignment(&c).unwrap().total_cost, 7.0);

        let c = CostMatrix::from_rows(&[vec![2.5; 3], vec![2.5; 3], vec![2.5; 3]]).unwrap();
        assert_abs_diff_eq!(brute_force_max_assignment(&c).unwrap().total_cost, 7.5);
    }

    #[test]
    fn brute_force_refuses_large_matrices() {
        let c = CostMatrix::from_vec(1, 10, vec![0.0; 10]).unwrap();
        assert!(matches!(
            brute_force_max_assignment(&c),
            Err(AssignmentError::TooManyColumnsForBruteForce(10))
        ));
    }

    #[test]
    fn parse_text_format() {
        let c = CostMatrix::parse("2 3\n1 2 3\n4 5 6\n").unwrap();
        assert_eq!(c.n_rows(), 2);
        assert_eq!(c.n_cols(), 3);
        assert_eq!(c.get(1, 2), 6.0);
        let a = solve_max_assignment(&c).unwrap();
        assert_abs_diff_eq!(a.total_cost, 8.0); // 3 + 5 or 2 + 6
    }

    #[test]
    fn total_cost_matches_selected_entries() {
        let c = CostMatrix::from_rows(&[
            vec![0.3, 0.9, 0.1, 0.5],
            vec![0.8, 0.2, 0.7, 0.4],
            vec![0.6, 0.6, 0.6, 0.6],
        ])
        .unwrap();
        let a = solve_max_assignment(&c).unwrap();
        let recomputed: f64 = a
            .column_of_row
            .iter()
            .enumerate()
            .map(|(r, &col)| c.get(r, col))
            .sum();
        assert_abs_diff_eq!(a.total_cost, recomputed, epsilon = 1e-9);
    }

    fn arb_matrix() -> impl Strategy<Value = CostMatrix> {
        (1usize..=7)
            .prop_flat_map(|m| (Just(m), m..=7usize))
            .prop_flat_map(|(m, n)| {
                proptest::collection::vec(0.0f64..1.0, m * n)
                    .prop_map(move |costs| CostMatrix::from_vec(m, n, costs).unwrap())
            })
    }

    proptest! {
        #[test]
        fn matches_brute_force(c in arb_matrix()) {
            let fast = solve_max_assignment(&c).unwrap();
            let slow = brute_force_max_assignment(&c).unwrap();
            prop_assert!((fast.total_cost - slow.total_cost).abs() < 1e-9);
            // columns distinct
            let mut cols = fast.column_of_row.clone();
            cols.sort_unstable();
            cols.dedup();
            prop_assert_eq!(cols.len(), c.n_rows());
        }

        #[test]
        fn row_shift_invariance(c in arb_matrix(), shift in -10.0f64..10.0) {
            let shifted = CostMatrix::from_vec(
                c.n_rows(),
                c.n_cols(),
                (0..c.n_rows() * c.n_cols())
                    .map(|p| c.costs[p] + if p / c.n_cols() == 0 { shift } else { 0.0 })
                    .collect(),
            ).unwrap();
            let a = solve_max_assignment(&c).unwrap();
            let b = solve_max_assignment(&shifted).unwrap();
            prop_assert!((b.total_cost - shift - a.total_cost).abs() < 1e-9);
        }
    }

    #[test]
    fn row_permutation_permutes_unique_optimum() {
        // Strictly dominant diagonal: the optimum is unique.
        let c = CostMatrix::from_rows(&[
            vec![9.0, 1.0, 2.0],
            vec![1.5, 8.0, 0.5],
            vec![2.5, 0.0, 7.0],
        ])
        .unwrap();
        let a = solve_max_assignment(&c).unwrap();
        let swapped = CostMatrix::from_rows(&[
            vec![1.5, 8.0, 0.5],
            vec![9.0, 1.0, 2.0],
            vec![2.5, 0.0, 7.0],
        ])
        .unwrap();
        let b = solve_max_assignment(&swapped).unwrap();
        assert_eq!(
            b.column_of_row,
            vec![a.column_of_row[1], a.column_of_row[0], a.column_of_row[2]]
        );
    }
}
