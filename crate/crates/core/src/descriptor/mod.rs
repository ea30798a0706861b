//! Regular discrete-time descriptor systems, their quasi-Weierstraß form,
//! explicit solutions and state reconstruction.

mod solution;
mod system;
mod trajectory;
mod weierstrass;

pub use solution::ReconstructedState;
pub use system::DescriptorSystem;
pub use trajectory::{unvectorize, vectorize, Trajectory};
pub use weierstrass::{QuasiWeierstrass, COND_MAX};
