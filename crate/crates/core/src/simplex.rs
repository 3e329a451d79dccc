//! Dense primal simplex for the standard-form LP
//! `max c.x  s.t.  A x <= b,  x >= 0` with `b >= 0`.
//!
//! The all-slack basis is immediately feasible, so no phase-1 is needed.
//! Pivoting uses Dantzig's rule with lowest-index tie-breaking, falling back
//! to Bland's rule after a pivot budget to guarantee termination on
//! degenerate tableaus. Dual values are read off the reduced-cost row over
//! the slack columns at optimality.

const REDUCED_COST_EPS: f64 = 1e-10;
const PIVOT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, thiserror::Error)]
pub(crate) enum SimplexError {
    #[error("LP is unbounded")]
    Unbounded,
    #[error("right-hand side must be non-negative")]
    NegativeRhs,
    #[error("simplex did not terminate within the pivot budget")]
    Stalled,
}

pub(crate) struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual multiplier per constraint, non-negative at optimality.
    pub duals: Vec<f64>,
}

/// `a` is row-major `m x n`. Requires `b[i] >= 0` for all constraints.
pub(crate) fn max_simplex(
    a: &[f64],
    m: usize,
    n: usize,
    b: &[f64],
    c: &[f64],
) -> Result<SimplexSolution, SimplexError> {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    if b.iter().any(|&v| v < 0.0) {
        return Err(SimplexError::NegativeRhs);
    }

    // Tableau: m constraint rows, columns [structural | slack | rhs].
    let width = n + m + 1;
    let rhs = n + m;
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i * n..(i + 1) * n]);
        row[n + i] = 1.0;
        row[rhs] = b[i];
    }
    // Reduced-cost row z_j - c_j; rhs cell holds the current objective.
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -c[j];
    }

    let mut basis: Vec<usize> = (n..n + m).collect();
    let budget = 100 * (m + n) + 10_000;
    let bland_after = 10 * (m + n) + 100;

    for pivot_count in 0..budget {
        // Entering column.
        let entering = if pivot_count < bland_after {
            // Dantzig: most negative reduced cost, lowest index on ties.
            let mut best = None;
            let mut best_val = -REDUCED_COST_EPS;
            for j in 0..n + m {
                if obj[j] < best_val {
                    best_val = obj[j];
                    best = Some(j);
                }
            }
            best
        } else {
            (0..n + m).find(|&j| obj[j] < -REDUCED_COST_EPS)
        };
        let Some(q) = entering else {
            // Optimal.
            let mut x = vec![0.0; n];
            for (i, &var) in basis.iter().enumerate() {
                if var < n {
                    x[var] = t[i * width + rhs].max(0.0);
                }
            }
            let duals = (0..m).map(|i| obj[n + i].max(0.0)).collect();
            return Ok(SimplexSolution {
                x,
                objective: obj[rhs],
                duals,
            });
        };

        // Leaving row: minimum ratio, ties broken by lowest basic variable
        // index (Bland's leaving rule, also applied in the Dantzig phase).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let coeff = t[i * width + q];
            if coeff > PIVOT_EPS {
                let ratio = t[i * width + rhs] / coeff;
                let better = ratio < best_ratio - PIVOT_EPS
                    || (ratio < best_ratio + PIVOT_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better || leave.is_none() {
                    best_ratio = best_ratio.min(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            return Err(SimplexError::Unbounded);
        };

        // Pivot on (p, q).
        let pivot = t[p * width + q];
        for j in 0..width {
            t[p * width + j] /= pivot;
        }
        for i in 0..m {
            if i == p {
                continue;
            }
            let factor = t[i * width + q];
            if factor != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= factor * t[p * width + j];
                }
                t[i * width + q] = 0.0;
            }
        }
        let factor = obj[q];
        if factor != 0.0 {
            for j in 0..width {
                obj[j] -= factor * t[p * width + j];
            }
            obj[q] = 0.0;
        }
        basis[p] = q;
    }
    Err(SimplexError::Stalled)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), obj 36.
        let a = vec![1.0, 0.0, 0.0, 2.0, 3.0, 2.0];
        let sol = max_simplex(&a, 3, 2, &[4.0, 12.0, 18.0], &[3.0, 5.0]).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn duals_satisfy_strong_duality() {
        let a = vec![1.0, 0.0, 0.0, 2.0, 3.0, 2.0];
        let b = [4.0, 12.0, 18.0];
        let sol = max_simplex(&a, 3, 2, &b, &[3.0, 5.0]).unwrap();
        let dual_obj: f64 = sol.duals.iter().zip(&b).map(|(&y, &bi)| y * bi).sum();
        assert!((dual_obj - sol.objective).abs() < 1e-9);
    }

    #[test]
    fn detects_unbounded() {
        // max x s.t. -x <= 1.
        let res = max_simplex(&[-1.0], 1, 1, &[1.0], &[1.0]);
        assert!(matches!(res, Err(SimplexError::Unbounded)));
    }

    #[test]
    fn rejects_negative_rhs() {
        let res = max_simplex(&[1.0], 1, 1, &[-1.0], &[1.0]);
        assert!(matches!(res, Err(SimplexError::NegativeRhs)));
    }
}
