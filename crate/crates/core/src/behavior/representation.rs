//! Non-parametric representation of the finite-horizon manifest behavior
//! by block Hankel matrices of one recorded trajectory.

use super::hankel_of;
use crate::descriptor::{unvectorize, Trajectory};
use crate::error::{input_err, Result};
use crate::linalg::{self, LeastSquares, Matrix, Vector};

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

/// `[H_L(u); H_L(y)]` built from data on `[0, T − s]`.
///
/// Only samples up to `T − s` enter the matrices; `s = 1` is the classical
/// full-data construction and the safe choice when the structure is unknown.
#[derive(Debug, Clone)]
pub struct HankelRepresentation {
    depth: usize,
    truncation: usize,
    data: Trajectory,
    hu: Matrix,
    hy: Matrix,
    solver: LeastSquares,
}

/// Outcome of a membership query.
#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    /// Minimum-norm coefficient vector.
    pub alpha: Vector,
    pub residual: f64,
}

impl HankelRepresentation {
    pub fn new(data: &Trajectory, depth: usize, truncation: usize) -> Result<Self> {
        if truncation == 0 || depth == 0 {
            return input_err("depth and truncation index must be positive");
        }
        let len = data.len();
        if len + 2 < truncation + depth + 1 {
            return input_err(format!(
                "{len} samples leave no Hankel column for depth {depth} and truncation {truncation}"
            ));
        }
        let used = len + 1 - truncation;
        let u = data.inputs().columns(0, used).into_owned();
        let y = data.outputs().columns(0, used).into_owned();
        let hu = hankel_of(&u, depth)?;
        let hy = hankel_of(&y, depth)?;
        let solver = LeastSquares::new(&linalg::vstack(&[&hu, &hy]), linalg::RANK_TOL);
        Ok(Self {
            depth,
            truncation,
            data: data.clone(),
            hu,
            hy,
            solver,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
    pub fn truncation(&self) -> usize {
        self.truncation
    }
    pub fn data(&self) -> &Trajectory {
        &self.data
    }
    pub fn data_len(&self) -> usize {
        self.data.len()
    }
    pub fn m(&self) -> usize {
        self.data.m()
    }
    pub fn p(&self) -> usize {
        self.data.p()
    }
    pub fn cols(&self) -> usize {
        self.hu.ncols()
    }
    pub fn input_hankel(&self) -> &Matrix {
        &self.hu
    }
    pub fn output_hankel(&self) -> &Matrix {
        &self.hy
    }
    /// `[Hu; Hy]`.
    pub fn stacked(&self) -> Matrix {
        linalg::vstack(&[&self.hu, &self.hy])
    }
    /// Numerical rank of `[Hu; Hy]`.
    pub fn rank(&self) -> usize {
        self.solver.rank()
    }

    fn check_candidate(&self, candidate: &Trajectory) -> Result<()> {
        if candidate.len() != self.depth || candidate.m() != self.m() || candidate.p() != self.p()
        {
            return input_err(format!(
                "candidate of length {} with (m, p) = ({}, {}) does not match depth {} and ({}, {})",
                candidate.len(),
                candidate.m(),
                candidate.p(),
                self.depth,
                self.m(),
                self.p()
            ));
        }
        Ok(())
    }

    /// Whether `[Hu; Hy] α = [u; y]` is solvable, with the least-squares
    /// residual measured against `tol · (1 + ‖[u; y]‖)`.
    pub fn membership(&self, candidate: &Trajectory, tol: f64) -> Result<Membership> {
        self.check_candidate(candidate)?;
        let rhs = Vector::from_iterator(
            candidate.len() * (self.m() + self.p()),
            candidate
                .inputs()
                .iter()
                .chain(candidate.outputs().iter())
                .copied(),
        );
        let alpha = self.solver.solve(&rhs);
        let residual = (self.stacked() * &alpha - &rhs).norm();
        Ok(Membership {
            member: residual <= tol * (1.0 + rhs.norm()),
            alpha,
            residual,
        })
    }

    /// Trajectory `([Hu; Hy] α)` on `[0, depth − 1]`.
    pub fn synthesize(&self, alpha: &Vector) -> Result<Trajectory> {
        if alpha.len() != self.cols() {
            return input_err(format!(
                "coefficient vector has length {}, expected {}",
                alpha.len(),
                self.cols()
            ));
        }
        let u = unvectorize(&(&self.hu * alpha), self.m())?;
        let y = unvectorize(&(&self.hy * alpha), self.p())?;
        Trajectory::new(0, u, y)
    }
}
