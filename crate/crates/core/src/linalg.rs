//! Dense solves for the tiny systems that come up here (moment matrices,
//! heat-trace fits).

/// Solves `matrix · x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot is exactly zero.
pub fn solve(mut matrix: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    debug_assert!(matrix.len() == n && matrix.iter().all(|r| r.len() == n));
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| matrix[a][col].abs().total_cmp(&matrix[b][col].abs()))?;
        if matrix[pivot][col] == 0.0 || !matrix[pivot][col].is_finite() {
            return None;
        }
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = matrix[row][col] / matrix[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = matrix.split_at_mut(row);
            for (target, pivot) in lower[0][col..n].iter_mut().zip(&upper[col][col..n]) {
                *target -= factor * pivot;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|j| matrix[row][j] * x[j]).sum();
        x[row] = (rhs[row] - tail) / matrix[row][row];
    }
    Some(x)
}

/// 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁` through the explicit inverse.
/// Infinite for a singular matrix.
pub fn condition_number(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let column_sum = |col: &dyn Fn(usize) -> f64| (0..n).map(|i| col(i).abs()).sum::<f64>();
    let a_norm = (0..n)
        .map(|j| column_sum(&|i| matrix[i][j]))
        .fold(0.0, f64::max);
    let mut inv_norm: f64 = 0.0;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        match solve(matrix.to_vec(), e) {
            Some(col) => inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum()),
            None => return f64::INFINITY,
        }
    }
    a_norm * inv_norm
}
