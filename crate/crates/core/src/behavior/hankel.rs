use crate::error::{input_err, Result};
use crate::linalg::{Matrix, Vector};

/// Block Hankel matrix of depth `depth` from a stacked sequence of
/// `block`-vectors. Column `j` is the stacked window `f(j), …, f(j+depth−1)`.
pub fn hankel(stacked: &Vector, block: usize, depth: usize) -> Result<Matrix> {
    if block == 0 || stacked.len() % block != 0 {
        return input_err(format!(
            "vector of length {} is not a stack of {block}-vectors",
            stacked.len()
        ));
    }
    let len = stacked.len() / block;
    if depth == 0 || depth > len {
        return input_err(format!(
            "Hankel depth {depth} must lie in [1, {len}] for {len} samples"
        ));
    }
    let cols = len - depth + 1;
    let rows = block * depth;
    Ok(Matrix::from_fn(rows, cols, |i, j| stacked[j * block + i]))
}

/// [`hankel`] applied to samples stored column-wise.
pub fn hankel_of(samples: &Matrix, depth: usize) -> Result<Matrix> {
    hankel(
        &Vector::from_column_slice(samples.as_slice()),
        samples.nrows(),
        depth,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_depth_two() {
        let h = hankel(&Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0]), 1, 2).unwrap();
        assert_eq!(h, Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn full_depth_is_single_column() {
        let f = Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let h = hankel(&f, 2, 3).unwrap();
        assert_eq!(h.shape(), (6, 1));
        assert_eq!(h.column(0), f.column(0));
    }

    #[test]
    fn block_two_depth_two() {
        let f = Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let h = hankel(&f, 2, 2).unwrap();
        assert_eq!(h.shape(), (4, 2));
        assert_eq!(h.column(0).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(h.column(1).as_slice(), &[3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn depth_too_large() {
        assert!(hankel(&Vector::from_vec(vec![1.0, 2.0]), 1, 3).is_err());
        assert!(hankel(&Vector::from_vec(vec![1.0, 2.0, 3.0]), 2, 1).is_err());
    }
}
