use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::MpcConfig;
use super::log::{ClosedLoopLog, StepFailure, StepRecord};
use crate::behavior::HankelRepresentation;
use crate::descriptor::Trajectory;
use crate::error::{input_err, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::ocp::{solve_data_driven_ocp, OcpSolution, OcpSpec};

/// Result of one executed step.
#[derive(Debug, Clone)]
pub struct MpcStep {
    pub t: i64,
    pub u: Vector,
    pub y: Vector,
    /// `None` while priming.
    pub solution: Option<OcpSolution>,
}

/// Receding-horizon loop state at time `t`.
pub struct ClosedLoop<'a> {
    config: &'a MpcConfig,
    rep: &'a HankelRepresentation,
    priming: Matrix,
    t: i64,
    slow: Vector,
    inputs: Vec<Vector>,
    outputs: Vec<Vector>,
    /// Inputs committed after the last applied one.
    lookahead: Matrix,
    last_plan: Option<OcpSolution>,
}

impl<'a> ClosedLoop<'a> {
    pub fn new(config: &'a MpcConfig, rep: &'a HankelRepresentation, seed: u64) -> Result<Self> {
        config.validate()?;
        let sys = config.plant.system();
        if rep.depth() != config.depth() || rep.m() != sys.m() || rep.p() != sys.p() {
            return input_err(format!(
                "Hankel depth {} does not match window + horizon = {}",
                rep.depth(),
                config.depth()
            ));
        }
        let s = config.plant.nilpotency_index();
        let priming = match &config.priming_input {
            Some(u) => u.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Matrix::from_fn(sys.m(), config.priming_steps + s - 1, |_, _| {
                    rng.random_range(-1.0..1.0)
                })
            }
        };
        Ok(Self {
            config,
            rep,
            priming,
            t: 0,
            slow: config.initial_slow.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            lookahead: Matrix::zeros(sys.m(), s - 1),
            last_plan: None,
        })
    }

    pub fn time(&self) -> i64 {
        self.t
    }

    /// The last `w` measured samples.
    pub fn past_window(&self) -> Result<Trajectory> {
        let w = self.config.window_len;
        let k = self.inputs.len();
        if k < w {
            return input_err(format!("only {k} samples measured, window needs {w}"));
        }
        let u = Matrix::from_columns(&self.inputs[k - w..]);
        let y = Matrix::from_columns(&self.outputs[k - w..]);
        Trajectory::new(self.t - w as i64, u, y)
    }

    /// Adds `delta` to the output measured `lag` steps ago (`lag = 1` is the
    /// most recent one). Used to inject measurement faults.
    pub fn perturb_output(&mut self, lag: usize, delta: &Vector) -> Result<()> {
        let k = self.outputs.len();
        if lag == 0 || lag > k || delta.len() != self.outputs[0].len() {
            return input_err(format!("cannot perturb output {lag} steps back"));
        }
        self.outputs[k - lag] += delta;
        Ok(())
    }

    /// Solves the predictive problem (after priming), applies the first
    /// input and advances the plant by one step.
    pub fn step(&mut self) -> Result<MpcStep> {
        let cfg = self.config;
        let qw = &cfg.plant;
        let s = qw.nilpotency_index();
        let m = qw.system().m();
        let t = self.t;
        let (u, future, solution) = if (t as usize) < cfg.priming_steps {
            let k = t as usize;
            (
                self.priming.column(k).into_owned(),
                self.priming.columns(k + 1, s - 1).into_owned(),
                None,
            )
        } else {
            let sol = self.solve().map_err(|e| Error::Step {
                t,
                source: Box::new(e),
            })?;
            let w = cfg.window_len;
            let mut future = Matrix::zeros(m, s - 1);
            let avail = (sol.u_hat.ncols() - w - 1).min(s - 1);
            future
                .columns_mut(0, avail)
                .copy_from(&sol.u_hat.columns(w + 1, avail));
            (sol.first_input(w), future, Some(sol))
        };

        let mut window = Matrix::zeros(m, s);
        window.set_column(0, &u);
        window.columns_mut(1, s - 1).copy_from(&future);
        let fast = qw.fast_states(&window);
        let n = qw.system().n();
        let mut z = Vector::zeros(n);
        z.rows_mut(0, qw.slow_dim()).copy_from(&self.slow);
        z.rows_mut(qw.slow_dim(), qw.fast_dim())
            .copy_from(&fast.column(0));
        let x = qw.right_transform() * z;
        let y = qw.system().c() * &x + qw.system().d() * &u;
        self.slow = qw.slow_dynamics() * &self.slow + qw.slow_input() * &u;

        if let Some(sol) = &solution {
            debug!("t = {t}: cost {:.6e}, kkt residual {:.2e}", sol.cost, sol.kkt_residual);
        }
        self.inputs.push(u.clone());
        self.outputs.push(y.clone());
        self.lookahead = future;
        if solution.is_some() {
            self.last_plan = solution.clone();
        }
        self.t += 1;
        Ok(MpcStep {
            t,
            u,
            y,
            solution,
        })
    }

    fn solve(&self) -> Result<OcpSolution> {
        let cfg = self.config;
        let mut spec = OcpSpec::new(
            cfg.horizon,
            cfg.q_weight.clone(),
            cfg.r_weight.clone(),
            self.past_window()?,
            cfg.terminal_len,
        )?;
        if let Some(sp) = cfg.active_setpoint(self.t) {
            spec = spec.with_setpoint(sp.u.clone(), sp.y.clone())?;
        }
        solve_data_driven_ocp(self.rep, &spec)
    }

    /// Measured data so far together with the inputs committed beyond it.
    fn into_parts(self) -> (Matrix, Matrix, Vector, Matrix, Option<OcpSolution>) {
        let m = self.config.plant.system().m();
        let p = self.config.plant.system().p();
        let u = if self.inputs.is_empty() {
            Matrix::zeros(m, 0)
        } else {
            Matrix::from_columns(&self.inputs)
        };
        let y = if self.outputs.is_empty() {
            Matrix::zeros(p, 0)
        } else {
            Matrix::from_columns(&self.outputs)
        };
        (u, y, self.slow, self.lookahead, self.last_plan)
    }
}

/// Runs the loop for `total_steps` steps. A failing step ends the run and is
/// recorded in [`ClosedLoopLog::failure`].
pub fn run_closed_loop_logged(
    config: &MpcConfig,
    rep: &HankelRepresentation,
    seed: u64,
) -> Result<ClosedLoopLog> {
    let mut lp = ClosedLoop::new(config, rep, seed)?;
    let mut records = Vec::with_capacity(config.total_steps);
    let mut failure = None;
    for _ in 0..config.total_steps {
        let t = lp.time();
        match lp.step() {
            Ok(step) => records.push(StepRecord {
                t,
                y_ref: config.active_setpoint(t).map(|sp| sp.y.clone()),
                cost: step.solution.as_ref().map(|s| s.cost),
                residual: step.solution.as_ref().map(|s| s.kkt_residual),
                feasible: true,
                u: step.u,
                y: step.y,
                x: None,
            }),
            Err(e) => {
                warn!("closed loop aborted: {e}");
                failure = Some(StepFailure {
                    t,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    let (u, y, slow_end, lookahead, plan) = lp.into_parts();
    let mut log = ClosedLoopLog {
        records,
        failure,
        lookahead: lookahead.clone(),
    };
    if config.reconstruct_states && !log.records.is_empty() {
        reconstruct_states(config, &mut log, &u, &y, &slow_end, &lookahead, plan.as_ref());
    }
    info!(
        "closed loop: {} steps, feasible {}",
        log.records.len(),
        log.failure.is_none()
    );
    Ok(log)
}

/// As [`run_closed_loop_logged`], turning an aborted run into
/// [`Error::Step`].
pub fn run_closed_loop(
    config: &MpcConfig,
    rep: &HankelRepresentation,
    seed: u64,
) -> Result<ClosedLoopLog> {
    let log = run_closed_loop_logged(config, rep, seed)?;
    match &log.failure {
        Some(f) => Err(Error::Step {
            t: f.t,
            source: Box::new(Error::Numerical(f.message.clone())),
        }),
        None => Ok(log),
    }
}

/// Recovers `x(t)` for every record from the window starting at `t`. Windows
/// reaching past the end are completed by continuing the plant with the last
/// plan (or the committed inputs followed by zeros).
fn reconstruct_states(
    config: &MpcConfig,
    log: &mut ClosedLoopLog,
    u: &Matrix,
    y: &Matrix,
    slow_end: &Vector,
    lookahead: &Matrix,
    plan: Option<&OcpSolution>,
) {
    let qw = &config.plant;
    let (m, p) = (qw.system().m(), qw.system().p());
    let s = qw.nilpotency_index();
    let w = qw.window_len();
    let ext_len = w - 1;
    let ext_inputs_len = ext_len + s - 1;
    let mut ext_u = Matrix::zeros(m, ext_inputs_len.max(s));
    let committed: Matrix = match plan {
        Some(sol) if sol.start + config.window_len as i64 + 1 == log.records.len() as i64 => {
            let from = config.window_len + 1;
            sol.u_hat.columns(from, sol.u_hat.ncols() - from).into_owned()
        }
        _ => lookahead.clone(),
    };
    let k = committed.ncols().min(ext_u.ncols());
    ext_u.columns_mut(0, k).copy_from(&committed.columns(0, k));
    let ext = match qw.simulate(slow_end, &ext_u) {
        Ok(traj) => traj,
        Err(e) => {
            warn!("state reconstruction skipped: {e}");
            return;
        }
    };
    let total = u.ncols() + ext_len;
    let mut all_u = Matrix::zeros(m, total);
    let mut all_y = Matrix::zeros(p, total);
    all_u.columns_mut(0, u.ncols()).copy_from(u);
    all_y.columns_mut(0, y.ncols()).copy_from(y);
    all_u
        .columns_mut(u.ncols(), ext_len)
        .copy_from(&ext.inputs().columns(0, ext_len));
    all_y
        .columns_mut(y.ncols(), ext_len)
        .copy_from(&ext.outputs().columns(0, ext_len));
    for (k, rec) in log.records.iter_mut().enumerate() {
        let window = Trajectory::new(
            rec.t,
            all_u.columns(k, w).into_owned(),
            all_y.columns(k, w).into_owned(),
        )
        .expect("window of positive length");
        match qw.reconstruct_state(&window, 1e-6) {
            Ok(state) => rec.x = Some(state.initial()),
            Err(e) => warn!("state at t = {} not reconstructed: {e}", rec.t),
        }
    }
}
