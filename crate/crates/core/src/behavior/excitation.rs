//! Persistency of excitation: rank test, required orders and generation of
//! exciting random inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hankel_of;
use crate::error::{input_err, Error, Result};
use crate::linalg::{self, Matrix};

/// Attempts made by [`generate_pe_input`] before giving up.
pub const PE_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeReport {
    /// Excitation order tested.
    pub order: usize,
    /// `m · order`.
    pub required_rank: usize,
    pub achieved_rank: usize,
    /// Smallest singular value counted in the rank (0 when the rank is 0).
    pub smallest_retained_sv: f64,
    /// Whether `(m + 1) · order − 1 ≤ T`.
    pub length_ok: bool,
    pub verdict: bool,
}

/// Whether the `m × T` input sequence is persistently exciting of `order`,
/// i.e. `rank H_order(u) = m · order`.
pub fn is_persistently_exciting(inputs: &Matrix, order: usize, tol: f64) -> PeReport {
    let (m, len) = inputs.shape();
    let required_rank = m * order;
    let length_ok = order >= 1 && (m + 1) * order <= len + 1;
    let (achieved_rank, smallest) = if order >= 1 && order <= len {
        let h = hankel_of(inputs, order).expect("depth checked");
        let sv = linalg::singular_values(&h);
        let smax = sv.first().copied().unwrap_or(0.0);
        let kept: Vec<f64> = if smax > 0.0 {
            sv.into_iter().filter(|&s| s > tol * smax).collect()
        } else {
            Vec::new()
        };
        (kept.len(), kept.last().copied().unwrap_or(0.0))
    } else {
        (0, 0.0)
    };
    PeReport {
        order,
        required_rank,
        achieved_rank,
        smallest_retained_sv: smallest,
        length_ok,
        verdict: length_ok && achieved_rank == required_rank,
    }
}

/// Excitation order `L + q + s − 1` needed to represent trajectories of length `L`.
pub fn required_pe_order(horizon: usize, slow_dim: usize, index: usize) -> usize {
    horizon + slow_dim + index - 1
}

/// Conservative order `L + n` usable when `(q, s)` are unknown.
pub fn conservative_pe_order(horizon: usize, state_dim: usize) -> usize {
    horizon + state_dim
}

/// Shortest data length `(m + 1) · order − 1` compatible with excitation of `order`.
pub fn min_data_length(m: usize, order: usize) -> usize {
    (m + 1) * order - 1
}

/// Draws i.i.d. uniform inputs on `bounds` until they are persistently
/// exciting of `order`. Deterministic given `seed`.
pub fn generate_pe_input(
    len: usize,
    m: usize,
    order: usize,
    bounds: (f64, f64),
    seed: u64,
) -> Result<Matrix> {
    if m == 0 || order == 0 {
        return input_err("input dimension and order must be positive");
    }
    if !(bounds.0 <= bounds.1) {
        return input_err(format!("invalid bounds [{}, {}]", bounds.0, bounds.1));
    }
    let needed = min_data_length(m, order);
    if len < needed {
        return input_err(format!(
            "excitation of order {order} with {m} input(s) needs at least {needed} samples, got {len}"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = bounds;
    for _ in 0..PE_RETRIES {
        let u = Matrix::from_fn(m, len, |_, _| lo + (hi - lo) * rng.random::<f64>());
        if is_persistently_exciting(&u, order, linalg::RANK_TOL).verdict {
            return Ok(u);
        }
    }
    Err(Error::Generation(format!(
        "no persistently exciting input of order {order} after {PE_RETRIES} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_never_exciting() {
        for order in 1..5 {
            assert!(!is_persistently_exciting(&Matrix::zeros(1, 20), order, 1e-9).verdict);
        }
    }

    #[test]
    fn reported_length_is_too_short() {
        let u = Matrix::from_fn(1, 30, |_, j| ((j * 7919) % 31) as f64 / 31.0 - 0.5);
        let report = is_persistently_exciting(&u, 26, 1e-9);
        assert!(!report.length_ok);
        assert!(!report.verdict);
        // only 5 columns
        assert!(report.achieved_rank <= 5);
    }

    #[test]
    fn generated_input_is_exciting() {
        let u = generate_pe_input(60, 1, 26, (-1.0, 1.0), 7).unwrap();
        assert!(is_persistently_exciting(&u, 26, 1e-9).verdict);
        // deterministic
        assert_eq!(u, generate_pe_input(60, 1, 26, (-1.0, 1.0), 7).unwrap());
    }

    #[test]
    fn generation_errors() {
        assert!(matches!(
            generate_pe_input(30, 1, 26, (-1.0, 1.0), 1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            generate_pe_input(60, 1, 26, (0.0, 0.0), 1),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn orders() {
        assert_eq!(required_pe_order(20, 2, 2), 23);
        assert_eq!(required_pe_order(20, 4, 1), 24);
        assert_eq!(conservative_pe_order(20, 4), 24);
        assert_eq!(min_data_length(1, 26), 51);
    }

    #[test]
    fn boundary_length_accepted() {
        // (m+1)·order − 1 samples exactly: 2·3 − 1 = 5.
        let u = generate_pe_input(5, 1, 3, (-1.0, 1.0), 3).unwrap();
        assert_eq!(u.ncols(), 5);
    }
}
