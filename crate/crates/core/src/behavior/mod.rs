//! Hankel-matrix description of the manifest behavior: persistency of
//! excitation, membership of candidate trajectories and synthesis of new
//! ones from a single recorded trajectory.

mod excitation;
mod hankel;
mod representation;

pub use excitation::{
    conservative_pe_order, generate_pe_input, is_persistently_exciting, min_data_length,
    required_pe_order, PeReport, PE_RETRIES,
};
pub use hankel::{hankel, hankel_of};
pub use representation::{HankelRepresentation, Membership, MEMBERSHIP_TOL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{QuasiWeierstrass, Trajectory};
use crate::error::{input_err, Result};
use crate::linalg::{self, Matrix, Vector};

/// A recorded input/output trajectory together with its excitation report.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub trajectory: Trajectory,
    pub pe: PeReport,
}

/// Records `len` samples from the plant under a persistently exciting input
/// of `order`, drawn uniformly from `[−1, 1]`. The slow initial value is drawn
/// from the same interval; the `s − 1` trailing inputs needed by the fast
/// subsystem come from the same seeded stream.
pub fn collect_data(qw: &QuasiWeierstrass, len: usize, order: usize, seed: u64) -> Result<DataSet> {
    let m = qw.system().m();
    let needed = min_data_length(m, order);
    if len < needed {
        return input_err(format!(
            "data length {len} too short: excitation of order {order} needs at least {needed} samples"
        ));
    }
    let exciting = generate_pe_input(len, m, order, (-1.0, 1.0), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let tail = qw.nilpotency_index() - 1;
    let mut inputs = Matrix::zeros(m, len + tail);
    inputs.columns_mut(0, len).copy_from(&exciting);
    for j in len..len + tail {
        for i in 0..m {
            inputs[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    let z1 = Vector::from_fn(qw.slow_dim(), |_, _| rng.random_range(-1.0..1.0));
    let trajectory = qw.simulate(&z1, &inputs)?.manifest();
    let pe = is_persistently_exciting(trajectory.inputs(), order, linalg::RANK_TOL);
    Ok(DataSet { trajectory, pe })
}
