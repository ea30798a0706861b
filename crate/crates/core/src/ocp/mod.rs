//! Finite-horizon optimal control with past-consistency and terminal
//! equality constraints, formulated on recorded data (Hankel coefficients)
//! or on the model (explicit solution formula).

mod problem;
mod qp;
mod setup;

pub use problem::{
    build_data_driven_ocp, build_model_based_ocp, solve_data_driven_ocp, solve_model_based_ocp,
    OcpSolution, Qp,
};
pub use qp::{solve_equality_qp, QpSolution, CONSTRAINT_RCOND, INFEASIBLE_TOL, KKT_RCOND};
pub use setup::{OcpSpec, TerminalMode};
