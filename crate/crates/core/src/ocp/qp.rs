//! Equality-constrained convex quadratic programs
//!
//! ```text
//!     minimize    ½ xᵀ H x + gᵀ x
//!     subject to  A x = b
//! ```
//!
//! solved through the KKT system after compressing `A` to full row rank.


use crate::error::{input_err, Error, Result};
use crate::linalg::{self, LeastSquares, Matrix, Vector};

/// Singular values of the constraint matrix below this fraction of the
/// largest one are treated as redundant rows.
pub const CONSTRAINT_RCOND: f64 = 1e-10;

/// Relative cut-off for the minimum-norm KKT solve.
pub const KKT_RCOND: f64 = 1e-13;

/// Constraint residuals above `INFEASIBLE_TOL · (1 + ‖b‖)` mean infeasible.
pub const INFEASIBLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct QpSolution {
    /// Minimum-norm minimizer.
    pub x: Vector,
    /// Multipliers of the original (uncompressed) constraints.
    pub multipliers: Vector,
    /// `‖[H x + Aᵀ λ + g; A x − b]‖`.
    pub kkt_residual: f64,
    /// Distance of `b` to the range of `A`.
    pub constraint_residual: f64,
    /// Numerical rank of `A`.
    pub constraint_rank: usize,
    /// `½ xᵀ H x + gᵀ x`.
    pub objective: f64,
}

pub fn solve_equality_qp(h: &Matrix, g: &Vector, aeq: &Matrix, beq: &Vector) -> Result<QpSolution> {
    let n = h.nrows();
    if h.ncols() != n || g.len() != n {
        return input_err(format!(
            "cost has shape {:?} with gradient of length {}",
            h.shape(),
            g.len()
        ));
    }
    let k = aeq.nrows();
    if (k > 0 && aeq.ncols() != n) || beq.len() != k {
        return input_err(format!(
            "constraints have shape {:?} with right-hand side of length {}, expected {} columns",
            aeq.shape(),
            beq.len(),
            n
        ));
    }

    // Row compression: A' = Urᵀ A has full row rank, b' = Urᵀ b.
    let basis = if k > 0 && n > 0 {
        linalg::range(aeq, CONSTRAINT_RCOND)
    } else {
        Matrix::zeros(k, 0)
    };
    let constraint_residual = (beq - &basis * basis.tr_mul(beq)).norm();
    if constraint_residual > INFEASIBLE_TOL * (1.0 + beq.norm()) {
        return Err(Error::Infeasible {
            residual: constraint_residual,
        });
    }
    let rank = basis.ncols();
    let a_red = if k > 0 { basis.tr_mul(aeq) } else { Matrix::zeros(0, n) };
    let b_red = basis.tr_mul(beq);

    let mut kkt = Matrix::zeros(n + rank, n + rank);
    kkt.view_mut((0, 0), (n, n)).copy_from(h);
    kkt.view_mut((0, n), (n, rank)).copy_from(&a_red.transpose());
    kkt.view_mut((n, 0), (rank, n)).copy_from(&a_red);
    let mut rhs = Vector::zeros(n + rank);
    rhs.rows_mut(0, n).copy_from(&(-g));
    rhs.rows_mut(n, rank).copy_from(&b_red);

    let sol = LeastSquares::new(&kkt, KKT_RCOND).solve(&rhs);
    let x = sol.rows(0, n).into_owned();
    let multipliers = &basis * sol.rows(n, rank);

    let stationarity = h * &x + g + if k > 0 { aeq.tr_mul(&multipliers) } else { Vector::zeros(n) };
    let feasibility = if k > 0 { aeq * &x - beq } else { Vector::zeros(0) };
    let kkt_residual = (stationarity.norm_squared() + feasibility.norm_squared()).sqrt();
    let scale = 1.0 + g.norm() + beq.norm();
    if stationarity.norm() > INFEASIBLE_TOL * scale * (1.0 + h.norm()) {
        return Err(Error::Domain(format!(
            "objective unbounded below on the feasible set (stationarity residual {:.3e})",
            stationarity.norm()
        )));
    }
    let objective = 0.5 * x.dot(&(h * &x)) + g.dot(&x);
    Ok(QpSolution {
        x,
        multipliers,
        kkt_residual,
        constraint_residual,
        constraint_rank: rank,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_onto_hyperplane() {
        let sol = solve_equality_qp(
            &Matrix::identity(2, 2),
            &Vector::zeros(2),
            &Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            &Vector::from_vec(vec![1.0]),
        )
        .unwrap();
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.x[1], 0.0, epsilon = 1e-14);
        assert!(sol.kkt_residual < 1e-14);
    }

    #[test]
    fn unconstrained_stationary_point() {
        let g = Vector::from_vec(vec![-2.0, 0.0, 0.0]);
        let sol =
            solve_equality_qp(&Matrix::identity(3, 3), &g, &Matrix::zeros(0, 3), &Vector::zeros(0))
                .unwrap();
        assert_abs_diff_eq!((sol.x - Vector::from_vec(vec![2.0, 0.0, 0.0])).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 1.0, -1.0]);
        let b = Vector::from_vec(vec![1.0, 2.0, 0.0]);
        let sol = solve_equality_qp(&Matrix::identity(2, 2), &Vector::zeros(2), &a, &b).unwrap();
        assert_eq!(sol.constraint_rank, 2);
        assert_abs_diff_eq!(sol.x[0], 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(sol.x[1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn inconsistent_constraints_are_infeasible() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = Vector::from_vec(vec![1.0, 3.0]);
        let err = solve_equality_qp(&Matrix::identity(2, 2), &Vector::zeros(2), &a, &b).unwrap_err();
        match err {
            Error::Infeasible { residual } => assert!(residual > 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_hessian_gives_minimum_norm_minimizer() {
        // Cost depends on x0 only; x1 is free and must come out as 0.
        let h = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let g = Vector::from_vec(vec![-2.0, 0.0]);
        let sol = solve_equality_qp(&h, &g, &Matrix::zeros(0, 2), &Vector::zeros(0)).unwrap();
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sol.x[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn unbounded_is_reported() {
        let h = Matrix::zeros(1, 1);
        let g = Vector::from_vec(vec![1.0]);
        assert!(solve_equality_qp(&h, &g, &Matrix::zeros(0, 1), &Vector::zeros(0)).is_err());
    }
}
