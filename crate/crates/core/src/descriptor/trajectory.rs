use crate::descriptor::DescriptorSystem;
use crate::error::{input_err, Result};
use crate::linalg::{Matrix, Vector};

/// Input/output (and optionally state) samples on the integer interval
/// `[start, start + len − 1]`. Each sample is stored as one column.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    start: i64,
    u: Matrix,
    y: Matrix,
    x: Option<Matrix>,
}

impl Trajectory {
    /// Manifest trajectory (no states).
    pub fn new(start: i64, u: Matrix, y: Matrix) -> Result<Self> {
        if u.ncols() == 0 {
            return input_err("trajectory must contain at least one sample");
        }
        if u.ncols() != y.ncols() {
            return input_err(format!(
                "input and output lengths differ: {} vs {}",
                u.ncols(),
                y.ncols()
            ));
        }
        Ok(Self {
            start,
            u,
            y,
            x: None,
        })
    }

    /// Full-behavior trajectory carrying states.
    pub fn with_states(start: i64, u: Matrix, y: Matrix, x: Matrix) -> Result<Self> {
        let mut traj = Self::new(start, u, y)?;
        if x.ncols() != traj.len() {
            return input_err(format!(
                "state length {} differs from input length {}",
                x.ncols(),
                traj.len()
            ));
        }
        traj.x = Some(x);
        Ok(traj)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last time index (inclusive).
    pub fn end(&self) -> i64 {
        self.start + self.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m(&self) -> usize {
        self.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.y.nrows()
    }

    pub fn inputs(&self) -> &Matrix {
        &self.u
    }

    pub fn outputs(&self) -> &Matrix {
        &self.y
    }

    pub fn states(&self) -> Option<&Matrix> {
        self.x.as_ref()
    }

    /// Drops the states, keeping the manifest part.
    pub fn manifest(&self) -> Trajectory {
        Trajectory {
            start: self.start,
            u: self.u.clone(),
            y: self.y.clone(),
            x: None,
        }
    }

    /// Re-labels the time axis.
    pub fn shifted_to(mut self, start: i64) -> Trajectory {
        self.start = start;
        self
    }

    /// Sub-trajectory of `len` samples starting at absolute time `from`.
    pub fn window(&self, from: i64, len: usize) -> Result<Trajectory> {
        let offset = from - self.start;
        if offset < 0 || len == 0 || offset as usize + len > self.len() {
            return input_err(format!(
                "window [{from}, {}] outside trajectory [{}, {}]",
                from + len as i64 - 1,
                self.start,
                self.end()
            ));
        }
        let o = offset as usize;
        Ok(Trajectory {
            start: from,
            u: self.u.columns(o, len).into_owned(),
            y: self.y.columns(o, len).into_owned(),
            x: self.x.as_ref().map(|x| x.columns(o, len).into_owned()),
        })
    }

    /// Stacked inputs `[u(start); …; u(end)]`.
    pub fn vectorized_inputs(&self) -> Vector {
        vectorize(&self.u)
    }

    /// Stacked outputs `[y(start); …; y(end)]`.
    pub fn vectorized_outputs(&self) -> Vector {
        vectorize(&self.y)
    }

    /// Largest relative residual of the state and output equations over the
    /// interval. `None` when the trajectory carries no states.
    pub fn system_residual(&self, sys: &DescriptorSystem) -> Option<f64> {
        let x = self.x.as_ref()?;
        let scale = 1.0 + sys.e().norm() + sys.a().norm() + sys.b().norm() + sys.c().norm();
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            let xk = x.column(k);
            let uk = self.u.column(k);
            let out = self.y.column(k) - sys.c() * xk - sys.d() * uk;
            let size = 1.0 + xk.norm() + uk.norm() + self.y.column(k).norm();
            worst = worst.max(out.norm() / (scale * size));
            if k + 1 < self.len() {
                let dyn_res = sys.e() * x.column(k + 1) - sys.a() * xk - sys.b() * uk;
                let size = size + x.column(k + 1).norm();
                worst = worst.max(dyn_res.norm() / (scale * size));
            }
        }
        Some(worst)
    }
}

/// Column-wise stacking of a sequence stored as columns.
pub fn vectorize(samples: &Matrix) -> Vector {
    Vector::from_column_slice(samples.as_slice())
}

/// Inverse of [`vectorize`]: splits a stacked vector into `k`-dimensional samples.
pub fn unvectorize(stacked: &Vector, k: usize) -> Result<Matrix> {
    if k == 0 || stacked.len() % k != 0 {
        return input_err(format!(
            "vector of length {} is not a stack of {k}-vectors",
            stacked.len()
        ));
    }
    Ok(Matrix::from_column_slice(k, stacked.len() / k, stacked.as_slice()))
}
