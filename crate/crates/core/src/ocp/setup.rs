use log::warn;

use crate::descriptor::Trajectory;
use crate::error::{input_err, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalMode {
    /// The last `terminal_len` predicted samples equal the setpoint.
    Equality,
    None,
}

/// Finite-horizon problem data shared by the data-driven and the
/// model-based formulation.
///
/// The prediction covers `[t − w, t + L − 1]` where `w` is the length of the
/// measured past window and `t = past.end() + 1`. The cost weights the
/// samples on `[t, t + L − 1]`.
#[derive(Debug, Clone)]
pub struct OcpSpec {
    horizon: usize,
    q_weight: Matrix,
    r_weight: Matrix,
    past: Trajectory,
    setpoint_u: Vector,
    setpoint_y: Vector,
    terminal_len: usize,
    terminal: TerminalMode,
}

fn check_spd(name: &str, w: &Matrix, dim: usize) -> Result<()> {
    if w.shape() != (dim, dim) {
        return input_err(format!("{name} must be {dim}x{dim}, got {:?}", w.shape()));
    }
    if (w - w.transpose()).norm() > 1e-12 * (1.0 + w.norm()) {
        return input_err(format!("{name} is not symmetric"));
    }
    if w.clone().cholesky().is_none() {
        return input_err(format!("{name} is not positive definite"));
    }
    Ok(())
}

impl OcpSpec {
    /// Problem steering to the origin with terminal window `terminal_len`
    /// (normally `q + s − 1`).
    pub fn new(
        horizon: usize,
        q_weight: Matrix,
        r_weight: Matrix,
        past: Trajectory,
        terminal_len: usize,
    ) -> Result<Self> {
        if horizon == 0 {
            return input_err("horizon must be positive");
        }
        check_spd("Q", &q_weight, past.p())?;
        check_spd("R", &r_weight, past.m())?;
        if past.len() + horizon < 2 * terminal_len + 1 {
            warn!(
                "horizon {horizon} is shorter than 2·{terminal_len} + 1 - {}: past and terminal windows overlap",
                past.len()
            );
        }
        Ok(Self {
            horizon,
            setpoint_u: Vector::zeros(past.m()),
            setpoint_y: Vector::zeros(past.p()),
            q_weight,
            r_weight,
            past,
            terminal_len,
            terminal: TerminalMode::Equality,
        })
    }

    pub fn with_setpoint(mut self, u: Vector, y: Vector) -> Result<Self> {
        if u.len() != self.past.m() || y.len() != self.past.p() {
            return input_err(format!(
                "setpoint dimensions ({}, {}) do not match ({}, {})",
                u.len(),
                y.len(),
                self.past.m(),
                self.past.p()
            ));
        }
        self.setpoint_u = u;
        self.setpoint_y = y;
        Ok(self)
    }

    pub fn with_terminal(mut self, mode: TerminalMode) -> Self {
        self.terminal = mode;
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn q_weight(&self) -> &Matrix {
        &self.q_weight
    }
    pub fn r_weight(&self) -> &Matrix {
        &self.r_weight
    }
    pub fn past(&self) -> &Trajectory {
        &self.past
    }
    pub fn setpoint(&self) -> (&Vector, &Vector) {
        (&self.setpoint_u, &self.setpoint_y)
    }
    pub fn terminal(&self) -> TerminalMode {
        self.terminal
    }
    pub fn terminal_len(&self) -> usize {
        match self.terminal {
            TerminalMode::Equality => self.terminal_len,
            TerminalMode::None => 0,
        }
    }
    /// Length `w` of the measured past window.
    pub fn window_len(&self) -> usize {
        self.past.len()
    }
    /// Number of predicted samples `w + L`.
    pub fn prediction_len(&self) -> usize {
        self.past.len() + self.horizon
    }
    /// First time step of the decision horizon.
    pub fn current_time(&self) -> i64 {
        self.past.end() + 1
    }
    pub fn m(&self) -> usize {
        self.past.m()
    }
    pub fn p(&self) -> usize {
        self.past.p()
    }

    /// `Σ_{k<L} ‖ŷ(t+k) − y_s‖²_Q + ‖û(t+k) − u_s‖²_R` for a prediction on
    /// `[t − w, t + L − 1]` stored column-wise.
    pub fn stage_cost(&self, u_hat: &Matrix, y_hat: &Matrix) -> f64 {
        let w = self.window_len();
        (w..w + self.horizon)
            .map(|k| {
                let du = u_hat.column(k) - &self.setpoint_u;
                let dy = y_hat.column(k) - &self.setpoint_y;
                dy.dot(&(&self.q_weight * &dy)) + du.dot(&(&self.r_weight * &du))
            })
            .sum()
    }
}
