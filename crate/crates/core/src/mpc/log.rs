use std::io::Write;

use serde::Serialize;

use super::config::MpcConfig;
use crate::descriptor::Trajectory;
use crate::error::Result;
use crate::io::fmt_f64;
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: i64,
    pub u: Vector,
    pub y: Vector,
    /// Active output setpoint.
    pub y_ref: Option<Vector>,
    /// Optimal cost; `None` while priming.
    pub cost: Option<f64>,
    pub feasible: bool,
    /// KKT residual of the solved problem.
    pub residual: Option<f64>,
    pub x: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFailure {
    pub t: i64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopLog {
    pub records: Vec<StepRecord>,
    pub failure: Option<StepFailure>,
    /// Inputs committed after the last record (`s − 1` of them); together
    /// with the logged inputs they determine the last logged outputs.
    pub lookahead: Matrix,
}

impl ClosedLoopLog {
    /// Logged inputs and outputs as a trajectory.
    pub fn trajectory(&self) -> Option<Trajectory> {
        if self.records.is_empty() {
            return None;
        }
        let u: Vec<Vector> = self.records.iter().map(|r| r.u.clone()).collect();
        let y: Vec<Vector> = self.records.iter().map(|r| r.y.clone()).collect();
        Trajectory::new(
            self.records[0].t,
            Matrix::from_columns(&u),
            Matrix::from_columns(&y),
        )
        .ok()
    }

    /// Logged inputs followed by [`Self::lookahead`].
    pub fn inputs_with_lookahead(&self) -> Matrix {
        let m = self.lookahead.nrows();
        let k = self.records.len();
        let mut u = Matrix::zeros(m, k + self.lookahead.ncols());
        for (j, r) in self.records.iter().enumerate() {
            u.set_column(j, &r.u);
        }
        u.columns_mut(k, self.lookahead.ncols())
            .copy_from(&self.lookahead);
        u
    }

    /// `t,u_0..,y_0..,y_ref_0..,cost,feasible[,x_0..]`. Missing values are
    /// left empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let Some(first) = self.records.first() else {
            w.flush()?;
            return Ok(());
        };
        let (m, p) = (first.u.len(), first.y.len());
        let n = self
            .records
            .iter()
            .find_map(|r| r.x.as_ref().map(|x| x.len()));
        let mut header = vec!["t".to_string()];
        header.extend((0..m).map(|i| format!("u_{i}")));
        header.extend((0..p).map(|j| format!("y_{j}")));
        header.extend((0..p).map(|j| format!("y_ref_{j}")));
        header.push("cost".into());
        header.push("feasible".into());
        if let Some(n) = n {
            header.extend((0..n).map(|i| format!("x_{i}")));
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.t.to_string()];
            row.extend(r.u.iter().map(|&v| fmt_f64(v)));
            row.extend(r.y.iter().map(|&v| fmt_f64(v)));
            match &r.y_ref {
                Some(y) => row.extend(y.iter().map(|&v| fmt_f64(v))),
                None => row.extend(std::iter::repeat_n(String::new(), p)),
            }
            row.push(r.cost.map(fmt_f64).unwrap_or_default());
            row.push(r.feasible.to_string());
            if let Some(n) = n {
                match &r.x {
                    Some(x) => row.extend(x.iter().map(|&v| fmt_f64(v))),
                    None => row.extend(std::iter::repeat_n(String::new(), n)),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Behavior of the loop while one setpoint is active.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub start: i64,
    /// One past the last logged step of the segment.
    pub end: i64,
    pub setpoint: Vec<f64>,
    /// First `t` from which `‖y − y_s‖_∞ ≤ tol` holds for `q + s` steps.
    pub settling_time: Option<i64>,
    /// The bound holds from the settling time to the end of the segment.
    pub stays_settled: bool,
    /// Costs never grow by more than the slack.
    pub cost_non_increasing: bool,
    /// Largest growth of the optimal cost between consecutive steps.
    pub max_cost_increase: f64,
    pub final_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub segments: Vec<SegmentReport>,
    pub all_feasible: bool,
    pub failing_step: Option<i64>,
    pub max_residual: f64,
}

impl StabilityReport {
    pub fn converged(&self) -> bool {
        self.all_feasible
            && self
                .segments
                .iter()
                .all(|s| s.settling_time.is_some() && s.stays_settled && s.cost_non_increasing)
    }
}

/// Absolute slack allowed in the cost descent check.
pub const COST_SLACK: f64 = 1e-9;

/// Settling, cost descent and feasibility per setpoint segment.
pub fn stability_diagnostics(log: &ClosedLoopLog, config: &MpcConfig, tol: f64) -> StabilityReport {
    let hold = (config.plant.slow_dim() + config.plant.nilpotency_index()) as i64;
    let last = log.records.last().map_or(0, |r| r.t + 1);
    let mut segments = Vec::new();
    for (i, sp) in config.schedule.iter().enumerate() {
        let end = config
            .schedule
            .get(i + 1)
            .map_or(last, |next| next.start.min(last));
        if sp.start >= end {
            continue;
        }
        let recs: Vec<&StepRecord> = log
            .records
            .iter()
            .filter(|r| r.t >= sp.start && r.t < end)
            .collect();
        let errors: Vec<f64> = recs.iter().map(|r| (&r.y - &sp.y).amax()).collect();
        let ok: Vec<bool> = errors.iter().map(|&e| e <= tol).collect();
        let mut settling_time = None;
        for k in 0..ok.len() {
            let until = (k + hold as usize).min(ok.len());
            if until - k == hold as usize && ok[k..until].iter().all(|&b| b) {
                settling_time = Some(recs[k].t);
                break;
            }
        }
        let stays_settled = settling_time.is_some_and(|ts| {
            recs.iter()
                .zip(&ok)
                .filter(|(r, _)| r.t >= ts)
                .all(|(_, &b)| b)
        });
        let costs: Vec<f64> = recs.iter().filter_map(|r| r.cost).collect();
        let mut max_cost_increase = 0f64;
        let mut cost_non_increasing = true;
        for pair in costs.windows(2) {
            let inc = pair[1] - pair[0];
            max_cost_increase = max_cost_increase.max(inc);
            if inc > COST_SLACK {
                cost_non_increasing = false;
            }
        }
        segments.push(SegmentReport {
            start: sp.start,
            end,
            setpoint: sp.y.iter().copied().collect(),
            settling_time,
            stays_settled,
            cost_non_increasing,
            max_cost_increase,
            final_error: errors.last().copied(),
        });
    }
    StabilityReport {
        segments,
        all_feasible: log.failure.is_none() && log.records.iter().all(|r| r.feasible),
        failing_step: log.failure.as_ref().map(|f| f.t),
        max_residual: log
            .records
            .iter()
            .filter_map(|r| r.residual)
            .fold(0.0, f64::max),
    }
}
