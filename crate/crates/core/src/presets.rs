//! The four-state example with one input and four outputs used throughout
//! the tests, the CLI `paper-example` command and the acceptance suite.

use crate::behavior::{collect_data, required_pe_order, DataSet, HankelRepresentation};
use crate::descriptor::{DescriptorSystem, QuasiWeierstrass};
use crate::error::Result;
use crate::linalg::{Matrix, Vector, RANK_TOL};
use crate::mpc::{MpcConfig, Setpoint};

/// Prediction horizon.
pub const HORIZON: usize = 20;

/// Data length used by the reference experiment. The originally reported
/// length of 30 samples is too short for excitation of order 26 with one
/// input (at least 51 samples are needed).
pub const DATA_LENGTH: usize = 60;

/// Data length originally reported for the example.
pub const REPORTED_DATA_LENGTH: usize = 30;

/// Number of random priming steps before the controller takes over.
pub const PRIMING_STEPS: usize = 10;

/// Time of the second setpoint.
pub const SWITCH_TIME: i64 = 30;

/// Total number of closed-loop steps (including priming).
pub const TOTAL_STEPS: usize = 60;

pub fn example_system() -> DescriptorSystem {
    #[rustfmt::skip]
    let e = Matrix::from_row_slice(4, 4, &[
        0.0, 0.0, 1.0, 0.0,
        1.0, 2.0, 0.0, 2.0,
        2.0, 3.0, 1.0, 3.0,
        1.0, 2.0, 0.0, 2.0,
    ]);
    #[rustfmt::skip]
    let a = Matrix::from_row_slice(4, 4, &[
         1.0, 1.0, 0.0, 2.0,
         0.0, 2.0, 1.0, 1.0,
         1.0, 4.0, 2.0, 3.0,
        -1.0, 1.0, 1.0, 0.0,
    ]);
    let b = Matrix::from_column_slice(4, 1, &[-1.0, 2.0, 2.0, 3.0]);
    #[rustfmt::skip]
    let c = Matrix::from_row_slice(4, 4, &[
        1.0, 2.0, 1.0, 2.0,
        0.0, 1.0, 0.0, 1.0,
        1.0, 2.0, 1.0, 1.0,
        2.0, 2.0, 1.0, 2.0,
    ]);
    DescriptorSystem::new(e, a, b, c, Matrix::zeros(4, 1)).expect("preset dimensions")
}

/// The printed transformation pair `(P, S)`.
pub fn example_transformation() -> (Matrix, Matrix) {
    #[rustfmt::skip]
    let p = Matrix::from_row_slice(4, 4, &[
         0.0, -1.0,  0.0,  1.0,
        -1.0,  0.0,  1.0,  1.0,
         1.0,  0.0,  0.0, -1.0,
         1.0,  1.0, -1.0, -1.0,
    ]);
    #[rustfmt::skip]
    let s = Matrix::from_row_slice(4, 4, &[
         0.0, -1.0,  1.0,  0.0,
         1.0,  2.0, -1.0,  0.0,
        -1.0, -1.0,  1.0,  0.0,
         0.0,  1.0,  0.0, -1.0,
    ]);
    (p, s)
}

/// `(activation time, u_s, y_s)` pairs.
pub fn example_setpoints() -> Vec<(i64, Vector, Vector)> {
    vec![
        (
            PRIMING_STEPS as i64,
            Vector::zeros(1),
            Vector::from_vec(vec![20.0, 0.0, 0.0, 20.0]),
        ),
        (
            SWITCH_TIME,
            Vector::zeros(1),
            Vector::from_vec(vec![-10.0, 0.0, 0.0, -10.0]),
        ),
    ]
}

/// Closed-loop configuration of the reference experiment: horizon 20,
/// identity weights, the two setpoints above, random priming until the first
/// one activates and a zero initial slow state.
pub fn example_mpc_config(plant: QuasiWeierstrass) -> MpcConfig {
    let mut cfg = MpcConfig::new(plant, HORIZON, TOTAL_STEPS);
    cfg.priming_steps = PRIMING_STEPS;
    cfg.schedule = example_setpoints()
        .into_iter()
        .map(|(start, u, y)| Setpoint { start, u, y })
        .collect();
    cfg
}

/// Everything the reference experiment needs: configuration, recorded data
/// of length `data_len` and the Hankel representation built from it.
pub fn reference_experiment(
    data_len: usize,
    seed: u64,
) -> Result<(MpcConfig, DataSet, HankelRepresentation)> {
    let qw = QuasiWeierstrass::compute(&example_system(), RANK_TOL)?;
    let cfg = example_mpc_config(qw);
    let order = required_pe_order(cfg.depth(), cfg.plant.slow_dim(), cfg.plant.nilpotency_index());
    let data = collect_data(&cfg.plant, data_len, order, seed)?;
    let rep = HankelRepresentation::new(
        &data.trajectory,
        cfg.depth(),
        cfg.plant.nilpotency_index(),
    )?;
    Ok((cfg, data, rep))
}
