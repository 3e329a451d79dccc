//! Support-enumeration oracle for small zero-sum games.
//!
//! Deliberately independent of the simplex solver: candidate equilibria are
//! found by solving indifference systems over every equal-size support pair
//! with Gaussian elimination and filtering by feasibility and no-deviation
//! checks. Every zero-sum game has an equilibrium on some square support (a
//! basic LP solution), and every surviving candidate's value equals the
//! game value.
//!
//! Shared by `#[path]` include between the core oracle tests and the
//! acceptance suite.

use attrgame::game::PayoffMatrix;

pub const ORACLE_TOL: f64 = 1e-8;

/// Gaussian elimination with partial pivoting; `None` on (near-)singular
/// systems.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut v = b[row];
        for k in row + 1..n {
            v -= a[row][k] * x[k];
        }
        x[row] = v / a[row][row];
    }
    Some(x)
}

pub fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(
        start: usize,
        n: usize,
        size: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            recurse(i + 1, n, size, current, out);
            current.pop();
        }
    }
    recurse(0, n, size, &mut current, &mut out);
    out
}

/// All game values of support pairs that pass the equilibrium checks.
pub fn support_enumeration_values(matrix: &PayoffMatrix) -> Vec<f64> {
    let m = matrix.row_count();
    let n = matrix.col_count();
    let mut values = Vec::new();
    for size in 1..=m.min(n) {
        for rows in subsets_of_size(m, size) {
            for cols in subsets_of_size(n, size) {
                if let Some(v) = try_support(matrix, &rows, &cols) {
                    values.push(v);
                }
            }
        }
    }
    values
}

fn try_support(matrix: &PayoffMatrix, rows: &[usize], cols: &[usize]) -> Option<f64> {
    let s = rows.len();
    let m = matrix.row_count();
    let n = matrix.col_count();

    // Adversary mix y on `cols` making the learner indifferent across
    // `rows`: M_{S,T} y = v, sum y = 1. Unknowns [y..., v].
    let mut a = vec![vec![0.0; s + 1]; s + 1];
    let mut b = vec![0.0; s + 1];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            a[i][j] = matrix.entry(r, c);
        }
        a[i][s] = -1.0;
    }
    for j in 0..s {
        a[s][j] = 1.0;
    }
    b[s] = 1.0;
    let y_sol = gauss_solve(a, b)?;
    let (y, v) = (&y_sol[..s], y_sol[s]);

    // Learner mix x on `rows` making the adversary indifferent across
    // `cols`.
    let mut a = vec![vec![0.0; s + 1]; s + 1];
    let mut b = vec![0.0; s + 1];
    for (j, &c) in cols.iter().enumerate() {
        for (i, &r) in rows.iter().enumerate() {
            a[j][i] = matrix.entry(r, c);
        }
        a[j][s] = -1.0;
    }
    for i in 0..s {
        a[s][i] = 1.0;
    }
    b[s] = 1.0;
    let x_sol = gauss_solve(a, b)?;
    let (x, w) = (&x_sol[..s], x_sol[s]);

    if (v - w).abs() > ORACLE_TOL {
        return None;
    }
    if x.iter().chain(y).any(|&p| p < -ORACLE_TOL) {
        return None;
    }

    // No profitable deviation outside the supports: no row pays less than
    // v, no column collects more than v.
    for r in 0..m {
        let payoff: f64 = cols
            .iter()
            .zip(y)
            .map(|(&c, &yc)| matrix.entry(r, c) * yc)
            .sum();
        if payoff < v - ORACLE_TOL {
            return None;
        }
    }
    for c in 0..n {
        let payoff: f64 = rows
            .iter()
            .zip(x)
            .map(|(&r, &xr)| matrix.entry(r, c) * xr)
            .sum();
        if payoff > v + ORACLE_TOL {
            return None;
        }
    }
    Some(v)
}
