//! Quasi-Weierstraß form of a regular descriptor system.
//!
//! Invertible `P`, `S` with
//!
//! ```text
//!     S E P = [I_q 0; 0 N],   S A P = [A1 0; 0 I_r],
//!     S B   = [B1; B2],       C P   = [C1 C2],
//! ```
//!
//! `N` nilpotent of index `s`. The transformation is computed from the
//! limits of the Wong sequences
//!
//! ```text
//!     V_0 = R^n,  V_{i+1} = A^{-1}(E V_i)
//!     W_0 = {0},  W_{i+1} = E^{-1}(A W_i)
//! ```
//!
//! with `P = [V, W]` and `S = [E V, A W]^{-1}`.

use crate::descriptor::DescriptorSystem;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Largest accepted condition number of `[E V, A W]`.
pub const COND_MAX: f64 = 1e12;

/// Relative residual above which the computed form is rejected outright.
const ACCEPT_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct QuasiWeierstrass {
    system: DescriptorSystem,
    right: Matrix,
    left: Matrix,
    a1: Matrix,
    b1: Matrix,
    b2: Matrix,
    c1: Matrix,
    c2: Matrix,
    nilpotent: Matrix,
    index: usize,
    residual_e: f64,
    residual_a: f64,
}

impl QuasiWeierstrass {
    /// Computes the form from the Wong sequences. `tol` is the relative rank
    /// threshold (scaled by `max(1, ‖E‖, ‖A‖)`).
    pub fn compute(sys: &DescriptorSystem, tol: f64) -> Result<Self> {
        if !sys.check_regularity(tol) {
            return Err(Error::Domain("pencil (E, A) is not regular".into()));
        }
        let n = sys.n();
        let (e, a) = (sys.e(), sys.a());
        let atol = tol * 1f64.max(e.norm()).max(a.norm());

        let mut v = Matrix::identity(n, n);
        for _ in 0..=n {
            let next = linalg::preimage(a, &linalg::range_abs(&(e * &v), atol), atol);
            let done = next.ncols() == v.ncols();
            v = next;
            if done {
                break;
            }
        }
        let mut w = Matrix::zeros(n, 0);
        for _ in 0..=n {
            let next = linalg::preimage(e, &linalg::range_abs(&(a * &w), atol), atol);
            let done = next.ncols() == w.ncols();
            w = next;
            if done {
                break;
            }
        }
        let (q, r) = (v.ncols(), w.ncols());
        if q + r != n {
            return Err(Error::Domain(format!(
                "Wong limits have dimensions {q} + {r} != {n}; pencil is not regular"
            )));
        }

        let image = linalg::hstack(&[&(e * &v), &(a * &w)]);
        let cond = linalg::condition_number(&image);
        if cond > COND_MAX {
            return Err(Error::Numerical(format!(
                "[E V, A W] has condition number {cond:.3e}"
            )));
        }
        let left = image
            .try_inverse()
            .ok_or_else(|| Error::Numerical("[E V, A W] is singular".into()))?;
        let right = linalg::hstack(&[&v, &w]);

        let sep = &left * e * &right;
        let sap = &left * a * &right;
        let sb = &left * sys.b();
        let cp = sys.c() * &right;

        let a1 = sap.view((0, 0), (q, q)).into_owned();
        let nilpotent = sep.view((q, q), (r, r)).into_owned();
        let b1 = sb.rows(0, q).into_owned();
        let b2 = sb.rows(q, r).into_owned();
        let c1 = cp.columns(0, q).into_owned();
        let c2 = cp.columns(q, r).into_owned();

        let residual_e = (&sep - linalg::block_diag(&Matrix::identity(q, q), &nilpotent)).norm();
        let residual_a = (&sap - linalg::block_diag(&a1, &Matrix::identity(r, r))).norm();
        let scale = 1.0 + e.norm() + a.norm();
        if residual_e.max(residual_a) > ACCEPT_RESIDUAL * scale {
            return Err(Error::Numerical(format!(
                "block structure residuals {residual_e:.3e}, {residual_a:.3e} too large"
            )));
        }

        let index = nilpotency_index(&nilpotent, tol)?;
        Ok(Self {
            system: sys.clone(),
            right,
            left,
            a1,
            b1,
            b2,
            c1,
            c2,
            nilpotent,
            index,
            residual_e,
            residual_a,
        })
    }

    pub fn system(&self) -> &DescriptorSystem {
        &self.system
    }
    /// `P`, with `x = P z`.
    pub fn right_transform(&self) -> &Matrix {
        &self.right
    }
    /// `S`.
    pub fn left_transform(&self) -> &Matrix {
        &self.left
    }
    /// `A1`, dynamics of the slow subsystem.
    pub fn slow_dynamics(&self) -> &Matrix {
        &self.a1
    }
    /// `B1`.
    pub fn slow_input(&self) -> &Matrix {
        &self.b1
    }
    /// `B2`.
    pub fn fast_input(&self) -> &Matrix {
        &self.b2
    }
    /// `C1`.
    pub fn slow_output(&self) -> &Matrix {
        &self.c1
    }
    /// `C2`.
    pub fn fast_output(&self) -> &Matrix {
        &self.c2
    }
    /// `N`.
    pub fn nilpotent(&self) -> &Matrix {
        &self.nilpotent
    }
    /// `q`, dimension of the slow subsystem.
    pub fn slow_dim(&self) -> usize {
        self.a1.nrows()
    }
    /// `r`, dimension of the fast subsystem.
    pub fn fast_dim(&self) -> usize {
        self.nilpotent.nrows()
    }
    /// `s`, nilpotency index of `N` (1 when `r = 0`).
    pub fn nilpotency_index(&self) -> usize {
        self.index
    }

    /// `(‖S E P − blkdiag(I, N)‖_F, ‖S A P − blkdiag(A1, I)‖_F)`.
    pub fn residuals(&self) -> (f64, f64) {
        (self.residual_e, self.residual_a)
    }

    /// Length `q + s − 1` of the input/output window that pins the state.
    pub fn window_len(&self) -> usize {
        self.slow_dim() + self.index - 1
    }

    /// Smallest horizon `2q + 3s − 2` for which the terminal-constrained
    /// predictive controller is recursively feasible.
    pub fn min_horizon(&self) -> usize {
        2 * self.slow_dim() + 3 * self.index - 2
    }

    /// `[B1, A1 B1, …, A1^{q−1} B1]`.
    pub fn controllability_matrix(&self) -> Matrix {
        let q = self.slow_dim();
        let m = self.b1.ncols();
        let mut out = Matrix::zeros(q, q * m);
        let mut block = self.b1.clone();
        for k in 0..q {
            out.view_mut((0, k * m), (q, m)).copy_from(&block);
            block = &self.a1 * block;
        }
        out
    }

    /// `[C1; C1 A1; …; C1 A1^{blocks−1}]`.
    pub fn observability_matrix(&self, blocks: usize) -> Matrix {
        let q = self.slow_dim();
        let p = self.c1.nrows();
        let mut out = Matrix::zeros(blocks * p, q);
        let mut block = self.c1.clone();
        for k in 0..blocks {
            out.view_mut((k * p, 0), (p, q)).copy_from(&block);
            block = block * &self.a1;
        }
        out
    }

    /// Kalman rank test on the slow subsystem (equivalent to R-controllability).
    pub fn r_controllable(&self, tol: f64) -> bool {
        self.slow_dim() == 0 || linalg::rank(&self.controllability_matrix(), tol) == self.slow_dim()
    }

    /// Dual rank test (equivalent to R-observability).
    pub fn r_observable(&self, tol: f64) -> bool {
        let q = self.slow_dim();
        q == 0 || linalg::rank(&self.observability_matrix(q), tol) == q
    }

    /// Smallest `ϑ ∈ [1, q]` for which the first `ϑ` observability blocks
    /// already have rank `q`. Returns 0 when `q = 0`.
    pub fn observability_index(&self, tol: f64) -> Result<usize> {
        let q = self.slow_dim();
        if q == 0 {
            return Ok(0);
        }
        (1..=q)
            .find(|&k| linalg::rank(&self.observability_matrix(k), tol) == q)
            .ok_or_else(|| Error::Domain("system is not R-observable".into()))
    }

    /// `[N B2, N² B2, …, N^{s−1} B2]`, whose image is the set of admissible
    /// fast components of a consistent initial value.
    pub fn consistency_matrix(&self) -> Matrix {
        let r = self.fast_dim();
        let m = self.b2.ncols();
        let s = self.index;
        let mut out = Matrix::zeros(r, m * (s - 1));
        let mut block = &self.nilpotent * &self.b2;
        for k in 0..s - 1 {
            out.view_mut((0, k * m), (r, m)).copy_from(&block);
            block = &self.nilpotent * block;
        }
        out
    }

    /// Whether `x0 = (E x)(0)` is a consistent initial value.
    ///
    /// In transformed coordinates `S x0 = [z1(0); N z2(0)]`, and the second
    /// block must lie in the image of [`Self::consistency_matrix`].
    pub fn is_consistent_initial(&self, x0: &Vector, tol: f64) -> Result<bool> {
        let n = self.system.n();
        if x0.len() != n {
            return Err(Error::Input(format!(
                "initial value has length {}, expected {n}",
                x0.len()
            )));
        }
        let z = &self.left * x0;
        let fast = z.rows(self.slow_dim(), self.fast_dim()).into_owned();
        let threshold = tol * (1.0 + x0.norm());
        if self.fast_dim() == 0 {
            return Ok(true);
        }
        if self.index == 1 {
            return Ok(fast.norm() <= threshold);
        }
        let ls = linalg::LeastSquares::new(&self.consistency_matrix(), linalg::RANK_TOL);
        Ok(ls.residual(&fast) <= threshold)
    }

    /// Whether the constant pair `(u_s, y_s)` is an equilibrium, i.e. some
    /// constant state `x` satisfies `(E − A) x = B u_s` and `y_s = C x + D u_s`.
    pub fn is_stationary(&self, us: &Vector, ys: &Vector, tol: f64) -> bool {
        let sys = &self.system;
        if us.len() != sys.m() || ys.len() != sys.p() {
            return false;
        }
        let lhs = linalg::vstack(&[&(sys.e() - sys.a()), sys.c()]);
        let mut rhs = Vector::zeros(sys.n() + sys.p());
        rhs.rows_mut(0, sys.n()).copy_from(&(sys.b() * us));
        rhs.rows_mut(sys.n(), sys.p())
            .copy_from(&(ys - sys.d() * us));
        let ls = linalg::LeastSquares::new(&lhs, linalg::RANK_TOL);
        ls.residual(&rhs) <= tol * (1.0 + rhs.norm())
    }
}

/// Smallest `s ≥ 1` with `‖N^s‖ ≤ tol · max(1, ‖N‖^s)`; 1 for an empty `N`.
fn nilpotency_index(nilpotent: &Matrix, tol: f64) -> Result<usize> {
    let r = nilpotent.nrows();
    if r == 0 {
        return Ok(1);
    }
    let norm = nilpotent.norm();
    let mut power = nilpotent.clone();
    for s in 1..=r {
        if power.norm() <= tol * 1f64.max(norm.powi(s as i32)) {
            return Ok(s);
        }
        power = &power * nilpotent;
    }
    Err(Error::Numerical(format!(
        "fast block is not nilpotent (‖N^{r}‖ = {:.3e})",
        power.norm()
    )))
}
