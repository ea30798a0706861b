//! Dense linear-algebra helpers built on SVD: numerical rank, orthonormal
//! bases of ranges and kernels, subspace preimages and minimum-norm least
//! squares. Matrices are `nalgebra` types; the SVD itself is computed by
//! `faer`.

use nalgebra::{DMatrix, DVector};

/// Default relative threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Singular values of `m` in descending order (empty for an empty matrix).
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv = to_faer(m)
        .singular_values()
        .expect("SVD iteration converges for finite input");
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Number of singular values strictly above `rtol * sigma_max`.
pub fn rank(m: &Matrix, rtol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s > rtol * smax).count(),
        _ => 0,
    }
}

/// Number of singular values strictly above the absolute threshold `atol`.
pub fn rank_abs(m: &Matrix, atol: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > atol).count()
}

/// Full SVD: `U` is rows × rows, `V` is cols × cols, singular values in
/// descending order.
struct FullSvd {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

fn full_svd(m: &Matrix) -> FullSvd {
    let (r, c) = m.shape();
    let svd = to_faer(m)
        .svd()
        .expect("SVD iteration converges for finite input");
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..r.min(c)).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let sigma = order.iter().map(|&i| s[i]).collect();
    // Retained directions first; the remaining columns complete the bases.
    let perm = |k: usize, j: usize| if j < k { order[j] } else { j };
    let (fu, fv) = (svd.U(), svd.V());
    let u = Matrix::from_fn(r, r, |i, j| fu[(i, perm(order.len(), j))]);
    let v = Matrix::from_fn(c, c, |i, j| fv[(i, perm(order.len(), j))]);
    FullSvd { u, sigma, v }
}

/// Orthonormal basis of the column space, singular values above `atol`.
pub fn range_abs(m: &Matrix, atol: f64) -> Matrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Matrix::zeros(m.nrows(), 0);
    }
    let svd = full_svd(m);
    let k = svd.sigma.iter().filter(|&&s| s > atol).count();
    svd.u.columns(0, k).into_owned()
}

/// Orthonormal basis of the column space using a relative threshold.
pub fn range(m: &Matrix, rtol: f64) -> Matrix {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    range_abs(m, rtol * smax)
}

/// Orthonormal basis of the kernel, singular values at or below `atol` count as zero.
pub fn kernel_abs(m: &Matrix, atol: f64) -> Matrix {
    let c = m.ncols();
    if c == 0 {
        return Matrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return Matrix::identity(c, c);
    }
    let svd = full_svd(m);
    let k = svd.sigma.iter().filter(|&&s| s > atol).count();
    svd.v.columns(k, c - k).into_owned()
}

/// Orthonormal basis of the kernel using a relative threshold.
pub fn kernel(m: &Matrix, rtol: f64) -> Matrix {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    kernel_abs(m, rtol * smax)
}

/// Orthonormal basis of `{x : map·x ∈ span(basis)}` where `basis` has
/// orthonormal columns. `atol` is the absolute rank threshold.
pub fn preimage(map: &Matrix, basis: &Matrix, atol: f64) -> Matrix {
    let n = map.nrows();
    let projector = Matrix::identity(n, n) - basis * basis.transpose();
    kernel_abs(&(projector * map), atol)
}

/// Spectral condition number; infinite for rank-deficient square matrices.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Stacks matrices with equal column count on top of each other.
pub fn vstack(blocks: &[&Matrix]) -> Matrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Stacks matrices with equal row count side by side.
pub fn hstack(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: row mismatch");
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

pub fn matrix_power(m: &Matrix, k: usize) -> Matrix {
    let mut out = Matrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Truncated SVD used for repeated minimum-norm least-squares solves
/// against the same matrix.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    u: Matrix,
    sigma: Vector,
    v: Matrix,
    cols: usize,
}

impl LeastSquares {
    /// Keeps singular values above `rtol * sigma_max`.
    pub fn new(m: &Matrix, rtol: f64) -> Self {
        let smax = singular_values(m).first().copied().unwrap_or(0.0);
        Self::with_threshold(m, rtol * smax)
    }

    pub fn with_threshold(m: &Matrix, atol: f64) -> Self {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Self {
                u: Matrix::zeros(rows, 0),
                sigma: Vector::zeros(0),
                v: Matrix::zeros(cols, 0),
                cols,
            };
        }
        let svd = full_svd(m);
        let k = svd.sigma.iter().filter(|&&s| s > atol).count();
        Self {
            u: svd.u.columns(0, k).into_owned(),
            sigma: Vector::from_iterator(k, svd.sigma.iter().take(k).copied()),
            v: svd.v.columns(0, k).into_owned(),
            cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Orthonormal basis of the numerical range.
    pub fn range_basis(&self) -> &Matrix {
        &self.u
    }

    /// Minimum-norm minimizer of `‖M x − b‖`.
    pub fn solve(&self, b: &Vector) -> Vector {
        if self.rank() == 0 {
            return Vector::zeros(self.cols);
        }
        let mut coeff = self.u.tr_mul(b);
        coeff.component_div_assign(&self.sigma);
        &self.v * coeff
    }

    /// Distance from `b` to the numerical range of `M`.
    pub fn residual(&self, b: &Vector) -> f64 {
        if self.rank() == 0 {
            return b.norm();
        }
        let proj = &self.u * self.u.tr_mul(b);
        (b - proj).norm()
    }
}
