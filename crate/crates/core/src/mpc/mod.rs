//! Receding-horizon control of a simulated descriptor plant with the
//! data-driven predictor, setpoint schedules and closed-loop diagnostics.

mod config;
mod log;
mod run;

pub use config::{MpcConfig, Setpoint};
pub use log::{
    stability_diagnostics, ClosedLoopLog, SegmentReport, StabilityReport, StepFailure, StepRecord,
    COST_SLACK,
};
pub use run::{run_closed_loop, run_closed_loop_logged, ClosedLoop, MpcStep};
