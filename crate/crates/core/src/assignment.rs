//! Maximum-weight one-to-one assignment between predictions and references.
//!
//! The solver pads the weight matrix to a square, runs the O(k^3)
//! Kuhn-Munkres algorithm to find the optimal total, and then fixes rows in
//! ascending order to the lowest column that still admits an optimal
//! completion. Zero-weight and padding pairs are dropped from the result.

/// Totals within this distance of the optimum are treated as equal.
const TOTAL_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `(row, column, weight)` triples sorted by row; every weight is positive.
    pub pairs: Vec<(usize, usize, f64)>,
    pub total: f64,
}

/// Minimum-cost perfect matching on a square cost matrix.
/// Returns `row -> column`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row (1-based) matched to column j; column 0 is the virtual root.
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Best total weight over the sub-matrix spanned by `rows` x `cols`.
fn best_total(weights: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| -weights[r][c]).collect())
        .collect();
    hungarian(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| weights[rows[i]][cols[j]])
        .sum()
}

/// Maximum-weight partial matching of an `m x n` weight matrix.
///
/// Ties between optimal matchings go to the one whose row-to-column vector
/// is lexicographically smallest. Entries must be finite and non-negative.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Assignment {
    let m = weights.len();
    let n = weights.first().map_or(0, Vec::len);
    assert!(
        weights.iter().all(|row| row.len() == n),
        "weight matrix rows must have equal length"
    );
    debug_assert!(weights.iter().flatten().all(|w| w.is_finite() && *w >= 0.0));
    if m == 0 || n == 0 {
        return Assignment { pairs: Vec::new(), total: 0.0 };
    }

    let k = m.max(n);
    let square: Vec<Vec<f64>> = (0..k)
        .map(|r| (0..k).map(|c| if r < m && c < n { weights[r][c] } else { 0.0 }).collect())
        .collect();

    let all: Vec<usize> = (0..k).collect();
    let optimum = best_total(&square, &all, &all);

    let mut free_cols: Vec<usize> = all.clone();
    let mut fixed_total = 0.0;
    let mut row_to_col = vec![0usize; k];
    for row in 0..k {
        let rest_rows: Vec<usize> = (row + 1..k).collect();
        let mut chosen = None;
        for (pos, &col) in free_cols.iter().enumerate() {
            let rest_cols: Vec<usize> = free_cols
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .map(|(_, &c)| c)
                .collect();
            let candidate = fixed_total + square[row][col] + best_total(&square, &rest_rows, &rest_cols);
            if candidate >= optimum - TOTAL_EPS {
                chosen = Some(pos);
                break;
            }
        }
        // The optimum is always reachable from an optimal prefix, so some
        // column qualifies; fall back to the first free one on float noise.
        let pos = chosen.unwrap_or(0);
        let col = free_cols.remove(pos);
        fixed_total += square[row][col];
        row_to_col[row] = col;
    }

    let pairs: Vec<(usize, usize, f64)> = row_to_col
        .iter()
        .enumerate()
        .filter(|&(r, &c)| r < m && c < n && weights[r][c] > 0.0)
        .map(|(r, &c)| (r, c, weights[r][c]))
        .collect();
    let total = pairs.iter().map(|p| p.2).sum();
    Assignment { pairs, total }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matrix() {
        let a = max_weight_assignment(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(a.pairs, vec![(0, 0, 1.0), (1, 1, 1.0)]);
        assert_eq!(a.total, 2.0);
    }

    #[test]
    fn shared_column_leaves_row_unmatched() {
        let a = max_weight_assignment(&[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]);
        assert_eq!(a.pairs, vec![(0, 0, 1.0)]);
        assert_eq!(a.total, 1.0);
    }

    #[test]
    fn prefers_global_optimum_over_greedy() {
        let a = max_weight_assignment(&[vec![0.9, 0.8], vec![0.7, 0.0]]);
        assert_eq!(a.pairs, vec![(0, 1, 0.8), (1, 0, 0.7)]);
        assert!((a.total - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ties_take_lowest_indices() {
        let a = max_weight_assignment(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(a.pairs, vec![(0, 0, 1.0), (1, 1, 1.0)]);
        let a = max_weight_assignment(&[vec![0.5, 0.5, 0.5]]);
        assert_eq!(a.pairs, vec![(0, 0, 0.5)]);
    }

    #[test]
    fn tall_and_zero_matrices() {
        let a = max_weight_assignment(&[vec![0.0], vec![0.3], vec![0.6]]);
        assert_eq!(a.pairs, vec![(2, 0, 0.6)]);
        let a = max_weight_assignment(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert!(a.pairs.is_empty());
        assert_eq!(a.total, 0.0);
        assert!(max_weight_assignment(&[]).pairs.is_empty());
    }
}
