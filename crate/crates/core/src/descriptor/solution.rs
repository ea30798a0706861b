//! Explicit solution formula of the quasi-Weierstraß form and its inverse,
//! the reconstruction of the latent state from an input/output window.

use crate::descriptor::{QuasiWeierstrass, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// States recovered from an input/output window.
#[derive(Debug, Clone)]
pub struct ReconstructedState {
    /// Time of the first recovered state.
    pub start: i64,
    /// Original-coordinate states, one column per time step.
    pub states: Matrix,
    /// Slow component `z1` at `start`.
    pub slow_initial: Vector,
    /// Least-squares residual of the output equations.
    pub residual: f64,
}

impl ReconstructedState {
    /// `x(start)`.
    pub fn initial(&self) -> Vector {
        self.states.column(0).into_owned()
    }
}

impl QuasiWeierstrass {
    /// Fast state `z2(t) = −Σ_{k<s} N^k B2 u(t+k)` for every `t` that has
    /// `s − 1` inputs following it. Column `j` is `z2(j)` relative to `inputs`.
    pub fn fast_states(&self, inputs: &Matrix) -> Matrix {
        let s = self.nilpotency_index();
        let r = self.fast_dim();
        let len = (inputs.ncols() + 1).saturating_sub(s);
        let mut out = Matrix::zeros(r, len);
        if r == 0 {
            return out;
        }
        let mut gains = Vec::with_capacity(s);
        let mut g = self.fast_input().clone();
        for _ in 0..s {
            gains.push(g.clone());
            g = self.nilpotent() * g;
        }
        for t in 0..len {
            let mut col = Vector::zeros(r);
            for (k, gain) in gains.iter().enumerate() {
                col -= gain * inputs.column(t + k);
            }
            out.set_column(t, &col);
        }
        out
    }

    /// Full trajectory on `[0, T − 1]` from the slow initial value and inputs
    /// on `[0, T + s − 2]`.
    pub fn simulate(&self, slow_initial: &Vector, inputs: &Matrix) -> Result<Trajectory> {
        let q = self.slow_dim();
        let s = self.nilpotency_index();
        let m = self.system().m();
        if slow_initial.len() != q {
            return Err(Error::Input(format!(
                "slow initial value has length {}, expected {q}",
                slow_initial.len()
            )));
        }
        if inputs.nrows() != m {
            return Err(Error::Input(format!(
                "inputs have {} rows, expected {m}",
                inputs.nrows()
            )));
        }
        if inputs.ncols() < s {
            return Err(Error::Input(format!(
                "need at least {s} inputs to produce one state, got {}",
                inputs.ncols()
            )));
        }
        let len = inputs.ncols() + 1 - s;
        let n = self.system().n();
        let fast = self.fast_states(inputs);
        let mut z = Matrix::zeros(n, len);
        let mut slow = slow_initial.clone();
        for t in 0..len {
            z.view_mut((0, t), (q, 1)).copy_from(&slow);
            z.view_mut((q, t), (self.fast_dim(), 1)).copy_from(&fast.column(t));
            slow = self.slow_dynamics() * &slow + self.slow_input() * inputs.column(t);
        }
        let u = inputs.columns(0, len).into_owned();
        let x = self.right_transform() * &z;
        let y = self.system().c() * &x + self.system().d() * &u;
        Trajectory::with_states(0, u, y, x)
    }

    /// Recovers the state from a manifest window of length `q + s − 1`.
    pub fn reconstruct_state(&self, window: &Trajectory, tol: f64) -> Result<ReconstructedState> {
        let expected = self.window_len();
        if window.len() != expected {
            return Err(Error::Input(format!(
                "reconstruction window must have length q + s - 1 = {expected}, got {}",
                window.len()
            )));
        }
        self.reconstruct_from_blocks(window, self.slow_dim(), tol)
    }

    /// Recovers the state from a window of length `ϑ + s − 1`, where the
    /// first `ϑ` observability blocks must have full column rank.
    pub fn reconstruct_state_with_index(
        &self,
        window: &Trajectory,
        obs_index: usize,
        tol: f64,
    ) -> Result<ReconstructedState> {
        let q = self.slow_dim();
        if obs_index == 0 || linalg::rank(&self.observability_matrix(obs_index), linalg::RANK_TOL) != q
        {
            return Err(Error::Domain(format!(
                "{obs_index} observability blocks do not determine the slow state"
            )));
        }
        let expected = obs_index + self.nilpotency_index() - 1;
        if window.len() != expected {
            return Err(Error::Input(format!(
                "reconstruction window must have length {expected}, got {}",
                window.len()
            )));
        }
        self.reconstruct_from_blocks(window, obs_index, tol)
    }

    fn reconstruct_from_blocks(
        &self,
        window: &Trajectory,
        blocks: usize,
        tol: f64,
    ) -> Result<ReconstructedState> {
        let sys = self.system();
        let (q, p) = (self.slow_dim(), sys.p());
        if window.m() != sys.m() || window.p() != p {
            return Err(Error::Input(format!(
                "window has (m, p) = ({}, {}), system has ({}, {p})",
                window.m(),
                window.p(),
                sys.m()
            )));
        }
        if blocks == 0 {
            return Err(Error::Input("window does not cover any state".into()));
        }
        let u = window.inputs();
        let y = window.outputs();
        let fast = self.fast_states(u);
        debug_assert_eq!(fast.ncols(), blocks);

        // y(t+k) − D u(t+k) − C2 z2(t+k) − C1 Σ_{j<k} A1^{k−1−j} B1 u(t+j) = C1 A1^k z1(t)
        let obs = self.observability_matrix(blocks);
        let mut rhs = Vector::zeros(blocks * p);
        let mut forced = Vector::zeros(q);
        for k in 0..blocks {
            let row = y.column(k) - sys.d() * u.column(k) - self.fast_output() * fast.column(k)
                - self.slow_output() * &forced;
            rhs.rows_mut(k * p, p).copy_from(&row);
            forced = self.slow_dynamics() * forced + self.slow_input() * u.column(k);
        }
        let (slow_initial, residual) = if q == 0 {
            (Vector::zeros(0), rhs.norm())
        } else {
            let ls = linalg::LeastSquares::new(&obs, linalg::RANK_TOL);
            let z1 = ls.solve(&rhs);
            let residual = (&obs * &z1 - &rhs).norm();
            (z1, residual)
        };
        if residual > tol * (1.0 + rhs.norm()) {
            return Err(Error::InconsistentWindow { residual });
        }

        let n = sys.n();
        let mut z = Matrix::zeros(n, blocks);
        let mut slow = slow_initial.clone();
        for k in 0..blocks {
            z.view_mut((0, k), (q, 1)).copy_from(&slow);
            z.view_mut((q, k), (self.fast_dim(), 1)).copy_from(&fast.column(k));
            slow = self.slow_dynamics() * &slow + self.slow_input() * u.column(k);
        }
        Ok(ReconstructedState {
            start: window.start(),
            states: self.right_transform() * z,
            slow_initial,
            residual,
        })
    }
}
