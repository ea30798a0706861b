//! Willems' fundamental lemma for regular discrete-time descriptor systems
//! and a data-driven predictive controller built on it.
//!
//! * [`descriptor`]: system representation, quasi-Weierstraß form, simulation
//!   and state reconstruction.
//! * [`behavior`]: Hankel matrices, persistency of excitation and trajectory
//!   membership/synthesis.
//! * [`ocp`]: data-driven and model-based optimal control problems.
//! * [`mpc`]: the receding-horizon loop and its diagnostics.

pub mod behavior;
pub mod descriptor;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mpc;
pub mod ocp;
pub mod presets;
pub mod random;

pub use error::{Error, Result};
