use log::warn;

use crate::descriptor::QuasiWeierstrass;
use crate::error::{input_err, Result};
use crate::linalg::{Matrix, Vector};

/// Target `(u_s, y_s)` that becomes active at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Setpoint {
    pub start: i64,
    pub u: Vector,
    pub y: Vector,
}

/// Closed-loop experiment description. The plant is the simulated descriptor
/// system itself.
#[derive(Debug, Clone)]
pub struct MpcConfig {
    pub plant: QuasiWeierstrass,
    pub horizon: usize,
    pub q_weight: Matrix,
    pub r_weight: Matrix,
    /// Length of the measured past window matched by the predictor.
    pub window_len: usize,
    /// Length of the terminal window pinned to the setpoint.
    pub terminal_len: usize,
    pub schedule: Vec<Setpoint>,
    pub total_steps: usize,
    /// Steps driven by the priming input before the controller takes over.
    pub priming_steps: usize,
    /// Slow state `z1(0)`.
    pub initial_slow: Vector,
    /// Inputs on `[0, priming_steps + s − 2]`; drawn uniformly from `[−1, 1]`
    /// when absent.
    pub priming_input: Option<Matrix>,
    /// Bound on `‖y − y_s‖_∞` used by the settling analysis.
    pub settle_tol: f64,
    /// Reconstruct `x(t)` from the logged data after the run.
    pub reconstruct_states: bool,
}

impl MpcConfig {
    /// Identity weights, origin target from `t = 0`, zero initial slow state,
    /// windows of length `q + s − 1`.
    pub fn new(plant: QuasiWeierstrass, horizon: usize, total_steps: usize) -> Self {
        let sys = plant.system();
        let (m, p) = (sys.m(), sys.p());
        Self {
            horizon,
            q_weight: Matrix::identity(p, p),
            r_weight: Matrix::identity(m, m),
            window_len: plant.window_len(),
            terminal_len: plant.window_len(),
            schedule: vec![Setpoint {
                start: 0,
                u: Vector::zeros(m),
                y: Vector::zeros(p),
            }],
            total_steps,
            priming_steps: plant.window_len(),
            initial_slow: Vector::zeros(plant.slow_dim()),
            priming_input: None,
            settle_tol: 1e-3,
            reconstruct_states: false,
            plant,
        }
    }

    /// Uses the state dimension `n` for both windows instead of `q + s − 1`.
    pub fn conservative(mut self) -> Self {
        let n = self.plant.system().n();
        self.window_len = n;
        self.terminal_len = n;
        self.priming_steps = self.priming_steps.max(n);
        self
    }

    /// Depth `w + L` of the Hankel matrices the controller needs.
    pub fn depth(&self) -> usize {
        self.window_len + self.horizon
    }

    pub fn validate(&self) -> Result<()> {
        let sys = self.plant.system();
        let (m, p) = (sys.m(), sys.p());
        let s = self.plant.nilpotency_index();
        if self.horizon == 0 || self.total_steps == 0 {
            return input_err("horizon and total steps must be positive");
        }
        if self.window_len < self.plant.window_len() {
            return input_err(format!(
                "past window of length {} cannot pin the state (need {})",
                self.window_len,
                self.plant.window_len()
            ));
        }
        if self.priming_steps < self.window_len {
            return input_err(format!(
                "{} priming steps cannot fill a past window of length {}",
                self.priming_steps, self.window_len
            ));
        }
        if self.initial_slow.len() != self.plant.slow_dim() {
            return input_err("initial slow state has wrong dimension");
        }
        if let Some(u) = &self.priming_input {
            if u.shape() != (m, self.priming_steps + s - 1) {
                return input_err(format!(
                    "priming input must be {m}x{}, got {:?}",
                    self.priming_steps + s - 1,
                    u.shape()
                ));
            }
        }
        if self.schedule.is_empty() {
            return input_err("setpoint schedule is empty");
        }
        for pair in self.schedule.windows(2) {
            if pair[1].start <= pair[0].start {
                return input_err("setpoint activation times must be strictly increasing");
            }
        }
        for sp in &self.schedule {
            if sp.u.len() != m || sp.y.len() != p {
                return input_err(format!("setpoint at {} has wrong dimensions", sp.start));
            }
        }
        let needed = self.plant.min_horizon();
        if self.horizon < needed {
            warn!(
                "horizon {} is below 2q + 3s - 2 = {needed}; feasibility is not guaranteed",
                self.horizon
            );
        }
        Ok(())
    }

    /// Setpoint active at `t` (the last one with `start ≤ t`).
    pub fn active_setpoint(&self, t: i64) -> Option<&Setpoint> {
        self.schedule.iter().rev().find(|sp| sp.start <= t)
    }
}
