//! Seeded generators of well-conditioned regular descriptor systems with a
//! prescribed quasi-Weierstraß structure.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::descriptor::DescriptorSystem;
use crate::linalg::{self, Matrix};

/// A generated system together with the structure it was built from.
#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub system: DescriptorSystem,
    pub slow_dim: usize,
    pub fast_dim: usize,
    pub nilpotency_index: usize,
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random matrix with singular values in `[0.5, 2]`.
pub fn well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let q1 = gaussian(rng, n, n).qr().q();
    let q2 = gaussian(rng, n, n).qr().q();
    let d = Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        rng.random_range(0.5..2.0)
    }));
    q1 * d * q2
}

/// Nilpotent `r × r` matrix of index exactly `s` built from shift blocks.
fn nilpotent(r: usize, s: usize) -> Matrix {
    let mut n = Matrix::zeros(r, r);
    let mut start = 0;
    while start < r {
        let size = s.min(r - start);
        for i in 0..size - 1 {
            n[(start + i, start + i + 1)] = 1.0;
        }
        start += size;
    }
    n
}

/// Regular system with `q = n − r` slow states, `r` fast states and
/// nilpotency index `s` (`1 ≤ s ≤ r`, or `s = 1` when `r = 0`). The slow
/// dynamics have spectral norm `slow_norm`.
pub fn with_structure<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    p: usize,
    r: usize,
    s: usize,
    slow_norm: f64,
) -> RandomSystem {
    assert!(r <= n && (r == 0 && s == 1 || (1..=r).contains(&s)));
    let q = n - r;
    let mut a1 = gaussian(rng, q, q);
    if q > 0 {
        let norm = linalg::singular_values(&a1)[0];
        a1 *= slow_norm / norm;
    }
    let e_qw = linalg::block_diag(&Matrix::identity(q, q), &nilpotent(r, s));
    let a_qw = linalg::block_diag(&a1, &Matrix::identity(r, r));
    let left_inv = well_conditioned(rng, n);
    let right_inv = well_conditioned(rng, n);
    let e = &left_inv * e_qw * &right_inv;
    let a = &left_inv * a_qw * &right_inv;
    let b = &left_inv * gaussian(rng, n, m);
    let c = gaussian(rng, p, n) * &right_inv;
    let d = gaussian(rng, p, m);
    RandomSystem {
        system: DescriptorSystem::new(e, a, b, c, d).expect("consistent dimensions"),
        slow_dim: q,
        fast_dim: r,
        nilpotency_index: s,
    }
}

/// Random structure with `n ≤ max_n`, `m ≤ max_m`, `p ≤ max_p`.
pub fn any_structure<R: Rng + ?Sized>(
    rng: &mut R,
    max_n: usize,
    max_m: usize,
    max_p: usize,
) -> RandomSystem {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let p = rng.random_range(1..=max_p);
    let r = rng.random_range(0..=n);
    let s = if r == 0 { 1 } else { rng.random_range(1..=r) };
    with_structure(rng, n, m, p, r, s, 0.95)
}
