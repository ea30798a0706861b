//! Assembly of the data-driven and model-based problems as equality QPs
//! over a parameter vector `θ` that maps linearly onto the stacked predicted
//! trajectory `ξ = [û; ŷ] = M θ`.


use super::qp::{solve_equality_qp, QpSolution};
use super::setup::OcpSpec;
use crate::behavior::{HankelRepresentation, MEMBERSHIP_TOL};
use crate::descriptor::{unvectorize, QuasiWeierstrass, Trajectory};
use crate::error::{input_err, Error, Result};
use crate::linalg::{Matrix, Vector};

/// `½ θᵀ H θ + gᵀ θ + constant` subject to `A θ = b`, plus the map `M`
/// from `θ` to the stacked prediction.
#[derive(Debug, Clone)]
pub struct Qp {
    pub hessian: Matrix,
    pub gradient: Vector,
    pub constant: f64,
    pub constraints: Matrix,
    pub rhs: Vector,
    pub trajectory_map: Matrix,
}

/// Optimal prediction on `[t − w, t + L − 1]`.
#[derive(Debug, Clone)]
pub struct OcpSolution {
    pub start: i64,
    pub u_hat: Matrix,
    pub y_hat: Matrix,
    /// Hankel coefficients (empty for the model-based problem).
    pub alpha: Vector,
    pub cost: f64,
    pub kkt_residual: f64,
    /// Largest violation of the past and terminal equalities.
    pub constraint_violation: f64,
    pub feasible: bool,
}

impl OcpSolution {
    pub fn predicted(&self) -> Trajectory {
        Trajectory::new(self.start, self.u_hat.clone(), self.y_hat.clone())
            .expect("prediction has consistent shape")
    }

    /// `û(t)` for the first decision step, `w` samples into the prediction.
    pub fn first_input(&self, window_len: usize) -> Vector {
        self.u_hat.column(window_len).into_owned()
    }
}

/// Position of input `i` / output `j` of sample `k` in `ξ`.
struct Layout {
    m: usize,
    p: usize,
    len: usize,
}

impl Layout {
    fn input(&self, k: usize, i: usize) -> usize {
        k * self.m + i
    }
    fn output(&self, k: usize, j: usize) -> usize {
        self.m * self.len + k * self.p + j
    }
    fn size(&self) -> usize {
        (self.m + self.p) * self.len
    }
}

fn assemble(spec: &OcpSpec, map: Matrix) -> Qp {
    let (m, p) = (spec.m(), spec.p());
    let len = spec.prediction_len();
    let lay = Layout { m, p, len };
    let w = spec.window_len();
    let (us, ys) = spec.setpoint();

    // Weighted residual W^{1/2}(ξ − ref) over the decision horizon, as
    // cost = (M θ − ref)ᵀ W (M θ − ref).
    let mut weight = Matrix::zeros(lay.size(), lay.size());
    let mut reference = Vector::zeros(lay.size());
    for k in w..len {
        for i in 0..m {
            reference[lay.input(k, i)] = us[i];
            for i2 in 0..m {
                weight[(lay.input(k, i), lay.input(k, i2))] = spec.r_weight()[(i, i2)];
            }
        }
        for j in 0..p {
            reference[lay.output(k, j)] = ys[j];
            for j2 in 0..p {
                weight[(lay.output(k, j), lay.output(k, j2))] = spec.q_weight()[(j, j2)];
            }
        }
    }
    let wm = &weight * &map;
    let hessian = map.tr_mul(&wm) * 2.0;
    let hessian = (&hessian + hessian.transpose()) * 0.5;
    let gradient = wm.tr_mul(&reference) * -2.0;
    let constant = reference.dot(&(&weight * &reference));

    // Rows of the past window followed by the terminal window.
    let past = spec.past();
    let tl = spec.terminal_len().min(len);
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity((m + p) * (w + tl));
    for k in 0..w {
        for i in 0..m {
            rows.push((lay.input(k, i), past.inputs()[(i, k)]));
        }
        for j in 0..p {
            rows.push((lay.output(k, j), past.outputs()[(j, k)]));
        }
    }
    for k in len - tl..len {
        for i in 0..m {
            rows.push((lay.input(k, i), us[i]));
        }
        for j in 0..p {
            rows.push((lay.output(k, j), ys[j]));
        }
    }
    let mut constraints = Matrix::zeros(rows.len(), map.ncols());
    let mut rhs = Vector::zeros(rows.len());
    for (r, &(idx, value)) in rows.iter().enumerate() {
        constraints.row_mut(r).copy_from(&map.row(idx));
        rhs[r] = value;
    }
    Qp {
        hessian,
        gradient,
        constant,
        constraints,
        rhs,
        trajectory_map: map,
    }
}

fn finish(spec: &OcpSpec, qp: &Qp, sol: QpSolution, alpha: Vector) -> Result<OcpSolution> {
    let xi = &qp.trajectory_map * &sol.x;
    let len = spec.prediction_len();
    let split = spec.m() * len;
    let u_hat = unvectorize(&xi.rows(0, split).into_owned(), spec.m())?;
    let y_hat = unvectorize(&xi.rows(split, spec.p() * len).into_owned(), spec.p())?;
    let constraint_violation = (&qp.constraints * &sol.x - &qp.rhs).amax();
    Ok(OcpSolution {
        start: spec.past().start(),
        cost: spec.stage_cost(&u_hat, &y_hat),
        u_hat,
        y_hat,
        alpha,
        kkt_residual: sol.kkt_residual,
        constraint_violation,
        feasible: true,
    })
}

fn constant_trajectory(u: &Vector, y: &Vector, len: usize) -> Trajectory {
    let uu = Matrix::from_fn(u.len(), len, |i, _| u[i]);
    let yy = Matrix::from_fn(y.len(), len, |j, _| y[j]);
    Trajectory::new(0, uu, yy).expect("non-empty constant trajectory")
}

/// QP over the Hankel coefficients `α` with `[û; ŷ] = [Hu; Hy] α`.
pub fn build_data_driven_ocp(rep: &HankelRepresentation, spec: &OcpSpec) -> Result<Qp> {
    if rep.depth() != spec.prediction_len() {
        return input_err(format!(
            "Hankel depth {} does not match prediction length w + L = {}",
            rep.depth(),
            spec.prediction_len()
        ));
    }
    if rep.m() != spec.m() || rep.p() != spec.p() {
        return input_err("data and problem dimensions differ");
    }
    let (us, ys) = spec.setpoint();
    let steady = constant_trajectory(us, ys, rep.depth());
    if !rep.membership(&steady, MEMBERSHIP_TOL)?.member {
        return Err(Error::Domain("setpoint is not stationary for the recorded data".into()));
    }
    Ok(assemble(spec, rep.stacked()))
}

pub fn solve_data_driven_ocp(rep: &HankelRepresentation, spec: &OcpSpec) -> Result<OcpSolution> {
    let qp = build_data_driven_ocp(rep, spec)?;
    let sol = solve_equality_qp(&qp.hessian, &qp.gradient, &qp.constraints, &qp.rhs)?;
    let alpha = sol.x.clone();
    finish(spec, &qp, sol, alpha)
}

/// QP over `θ = [z1(t − w); u(t − w), …, u(t + L + s − 2)]` using the
/// explicit solution of the quasi-Weierstraß form.
pub fn build_model_based_ocp(qw: &QuasiWeierstrass, spec: &OcpSpec) -> Result<Qp> {
    let sys = qw.system();
    if sys.m() != spec.m() || sys.p() != spec.p() {
        return input_err("system and problem dimensions differ");
    }
    let (us, ys) = spec.setpoint();
    if !qw.is_stationary(us, ys, MEMBERSHIP_TOL) {
        return Err(Error::Domain("setpoint is not stationary for the system".into()));
    }
    let len = spec.prediction_len();
    let (q, m) = (qw.slow_dim(), sys.m());
    let n_inputs = len + qw.nilpotency_index() - 1;
    let params = q + m * n_inputs;
    let size = (m + sys.p()) * len;
    let mut map = Matrix::zeros(size, params);
    for col in 0..params {
        let mut z1 = Vector::zeros(q);
        let mut u = Matrix::zeros(m, n_inputs);
        if col < q {
            z1[col] = 1.0;
        } else {
            let k = col - q;
            u[(k % m, k / m)] = 1.0;
        }
        let traj = qw.simulate(&z1, &u)?;
        let mut xi = Vector::zeros(size);
        xi.rows_mut(0, m * len).copy_from_slice(traj.inputs().as_slice());
        xi.rows_mut(m * len, sys.p() * len)
            .copy_from_slice(traj.outputs().as_slice());
        map.set_column(col, &xi);
    }
    Ok(assemble(spec, map))
}

pub fn solve_model_based_ocp(qw: &QuasiWeierstrass, spec: &OcpSpec) -> Result<OcpSolution> {
    let qp = build_model_based_ocp(qw, spec)?;
    let sol = solve_equality_qp(&qp.hessian, &qp.gradient, &qp.constraints, &qp.rhs)?;
    finish(spec, &qp, sol, Vector::zeros(0))
}
