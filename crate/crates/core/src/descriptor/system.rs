use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input_err, Result};
use crate::linalg::Matrix;

/// Discrete-time linear descriptor system
///
/// ```text
///     E x(t+1) = A x(t) + B u(t)
///         y(t) = C x(t) + D u(t)
/// ```
///
/// with `E` possibly singular.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSystem {
    e: Matrix,
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl DescriptorSystem {
    pub fn new(e: Matrix, a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = e.nrows();
        if n == 0 {
            return input_err("state dimension must be positive");
        }
        if e.shape() != (n, n) || a.shape() != (n, n) {
            return input_err(format!(
                "E and A must be {n}x{n}, got {:?} and {:?}",
                e.shape(),
                a.shape()
            ));
        }
        let m = b.ncols();
        let p = c.nrows();
        if b.nrows() != n || m == 0 {
            return input_err(format!("B must be {n}xm with m > 0, got {:?}", b.shape()));
        }
        if c.ncols() != n || p == 0 {
            return input_err(format!("C must be px{n} with p > 0, got {:?}", c.shape()));
        }
        if d.shape() != (p, m) {
            return input_err(format!("D must be {p}x{m}, got {:?}", d.shape()));
        }
        Ok(Self { e, a, b, c, d })
    }

    pub fn e(&self) -> &Matrix {
        &self.e
    }
    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.e.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// Decides whether the pencil `(E, A)` is regular.
    ///
    /// `λ ↦ det(λE − A)` is a polynomial of degree at most `n`, so it is
    /// identically zero iff it vanishes at `n + 1` distinct points. The
    /// probes are `λ = 0, 1, …, n`; a second, seeded random batch is tried
    /// before declaring the pencil singular.
    pub fn check_regularity(&self, tol: f64) -> bool {
        let n = self.n();
        let scale = 1f64.max(self.e.norm()).max(self.a.norm()).powi(n as i32);
        let threshold = tol * scale;
        let probe = |lambda: f64| (&self.e * lambda - &self.a).determinant().abs() > threshold;
        if (0..=n).any(|i| probe(i as f64)) {
            return true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_9e9c11);
        (0..=n).any(|_| probe(rng.random_range(-1.0..1.0)))
    }
}
