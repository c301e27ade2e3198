//! Data matrices for the regression-type objectives, dense or row-compressed.

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProblemError;

/// Relative tolerance of the power iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-8;
/// Iteration cap of the power iteration.
pub const POWER_ITERATION_CAP: usize = 10_000;

/// Compressed sparse row matrix with 0-based column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from per-row `(column, value)` lists.
    pub fn from_rows(rows: &[Vec<(usize, f64)>], n_cols: usize) -> Result<Self, ProblemError> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if j >= n_cols {
                    return Err(ProblemError::DimensionMismatch(format!(
                        "row {i} references column {j} but the matrix has {n_cols} columns"
                    )));
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for i in 0..self.n_rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out[[i, self.indices[k]]] = self.values[k];
            }
        }
        out
    }
}

/// A data matrix `A` used through products with `A` and `A^T`.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Dense(Array2<f64>),
    Sparse(CsrMatrix),
}

impl From<Array2<f64>> for Design {
    fn from(a: Array2<f64>) -> Self {
        Design::Dense(a)
    }
}

impl From<CsrMatrix> for Design {
    fn from(a: CsrMatrix) -> Self {
        Design::Sparse(a)
    }
}

impl Design {
    pub fn n_rows(&self) -> usize {
        match self {
            Design::Dense(a) => a.nrows(),
            Design::Sparse(a) => a.n_rows,
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            Design::Dense(a) => a.ncols(),
            Design::Sparse(a) => a.n_cols,
        }
    }

    /// `A x`
    pub fn apply(&self, x: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Design::Dense(a) => a.dot(&x),
            Design::Sparse(a) => Array1::from_shape_fn(a.n_rows, |i| {
                (a.indptr[i]..a.indptr[i + 1])
                    .map(|k| a.values[k] * x[a.indices[k]])
                    .sum()
            }),
        }
    }

    /// `A^T r`
    pub fn apply_transpose(&self, r: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Design::Dense(a) => a.t().dot(&r),
            Design::Sparse(a) => {
                let mut out = Array1::zeros(a.n_cols);
                for i in 0..a.n_rows {
                    let ri = r[i];
                    for k in a.indptr[i]..a.indptr[i + 1] {
                        out[a.indices[k]] += a.values[k] * ri;
                    }
                }
                out
            }
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        match self {
            Design::Dense(a) => a.iter().map(|v| v * v).sum(),
            Design::Sparse(a) => a.values.iter().map(|v| v * v).sum(),
        }
    }

    /// Largest eigenvalue of `A^T A` by power iteration.
    pub fn gram_spectral_radius(&self) -> Result<f64, ProblemError> {
        if self.n_cols() == 0 || self.frobenius_norm_sq() == 0.0 {
            return Err(ProblemError::DegenerateInput("data matrix is zero".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Array1<f64> = Array1::from_shape_fn(self.n_cols(), |_| rng.random_range(-1.0..1.0));
        v /= v.dot(&v).sqrt();

        let mut lambda = 0.0;
        for _ in 0..POWER_ITERATION_CAP {
            let av = self.apply(v.view());
            // Rayleigh quotient of the normalized iterate
            let next = av.dot(&av);
            let w = self.apply_transpose(av.view());
            let norm = w.dot(&w).sqrt();
            if norm == 0.0 {
                // v fell into the null space; only possible for a pathological start
                return Err(ProblemError::ConvergenceFailure(
                    "power iteration collapsed to the null space".into(),
                ));
            }
            v = w / norm;
            if (next - lambda).abs() <= POWER_ITERATION_TOL * next {
                return Ok(next.max(lambda));
            }
            lambda = next;
        }
        Err(ProblemError::ConvergenceFailure(format!(
            "power iteration did not reach relative tolerance {POWER_ITERATION_TOL} in {POWER_ITERATION_CAP} iterations"
        )))
    }
}

/// `lambda_max(A^T A) / (4 n)`, the usual smoothness bound of the averaged
/// logistic loss.
pub fn lipschitz_bound(a: &Design, n: usize) -> Result<f64, ProblemError> {
    if n == 0 {
        return Err(ProblemError::DegenerateInput("sample count is zero".into()));
    }
    Ok(a.gram_spectral_radius()? / (4.0 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn identity_bound() {
        let a = Design::Dense(Array2::eye(2));
        assert_relative_eq!(lipschitz_bound(&a, 2).unwrap(), 0.125, max_relative = 1e-8);
    }

    #[test]
    fn single_row_is_squared_norm() {
        // one row a: A^T A = a a^T has eigenvalue |a|^2
        let s = 3.0;
        let a = Design::Dense(array![[1.0 * s, 2.0 * s, -2.0 * s]]);
        assert_relative_eq!(a.gram_spectral_radius().unwrap(), 9.0 * s * s, max_relative = 1e-8);
    }

    #[test]
    fn zero_matrix_rejected() {
        let a = Design::Dense(Array2::zeros((3, 2)));
        assert!(matches!(lipschitz_bound(&a, 3), Err(ProblemError::DegenerateInput(_))));
    }

    #[test]
    fn sparse_matches_dense() {
        let rows = vec![vec![(0, 1.0), (2, -2.0)], vec![], vec![(1, 0.5)]];
        let csr = CsrMatrix::from_rows(&rows, 3).unwrap();
        let dense = Design::Dense(csr.to_dense());
        let sparse = Design::Sparse(csr);
        let x = array![0.3, -1.0, 2.0];
        assert_eq!(sparse.apply(x.view()), dense.apply(x.view()));
        assert_eq!(sparse.apply_transpose(x.view()), dense.apply_transpose(x.view()));
        assert_relative_eq!(
            sparse.gram_spectral_radius().unwrap(),
            dense.gram_spectral_radius().unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn out_of_range_column_rejected() {
        assert!(CsrMatrix::from_rows(&[vec![(3, 1.0)]], 3).is_err());
    }
}
