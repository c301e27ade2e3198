use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_len, Problem, ProblemError};

/// `1/2 |U V^T - A|_F^2` over the stacked variable `(U, V)`, with `U` of
/// shape `m x r` and `V` of shape `n x r`, both flattened row-major and `U`
/// first.
#[derive(Debug, Clone)]
pub struct MatrixFactorization {
    a: Array2<f64>,
    rank: usize,
    init_seed: u64,
}

impl MatrixFactorization {
    /// Requires `1 <= rank < min(m, n)`. `init_seed` drives [`Problem::initial_point`].
    pub fn new(a: Array2<f64>, rank: usize, init_seed: u64) -> Result<Self, ProblemError> {
        let limit = a.nrows().min(a.ncols());
        if rank == 0 || rank >= limit {
            return Err(ProblemError::RankOutOfRange { rank, limit });
        }
        Ok(Self { a, rank, init_seed })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn target(&self) -> ArrayView2<'_, f64> {
        self.a.view()
    }

    /// Splits a flat variable into `(U, V)`.
    pub fn unpack(&self, x: ArrayView1<f64>) -> (Array2<f64>, Array2<f64>) {
        let (m, n, r) = (self.a.nrows(), self.a.ncols(), self.rank);
        let flat = x.to_vec();
        let u = Array2::from_shape_vec((m, r), flat[..m * r].to_vec()).expect("U block shape");
        let v = Array2::from_shape_vec((n, r), flat[m * r..].to_vec()).expect("V block shape");
        (u, v)
    }

    /// Inverse of [`Self::unpack`].
    pub fn pack(&self, u: ArrayView2<f64>, v: ArrayView2<f64>) -> Result<Array1<f64>, ProblemError> {
        check_len("U rows", u.nrows(), self.a.nrows())?;
        check_len("V rows", v.nrows(), self.a.ncols())?;
        check_len("U columns", u.ncols(), self.rank)?;
        check_len("V columns", v.ncols(), self.rank)?;
        Ok(u.iter().chain(v.iter()).copied().collect())
    }

    fn residual(&self, u: &Array2<f64>, v: &Array2<f64>) -> Array2<f64> {
        u.dot(&v.t()) - &self.a
    }
}

impl Problem for MatrixFactorization {
    fn name(&self) -> &str {
        "matrix-factorization"
    }

    fn dimension(&self) -> usize {
        (self.a.nrows() + self.a.ncols()) * self.rank
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        let (u, v) = self.unpack(x);
        let r = self.residual(&u, &v);
        0.5 * r.iter().map(|e| e * e).sum::<f64>()
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let (u, v) = self.unpack(x);
        let r = self.residual(&u, &v);
        let gu = r.dot(&v);
        let gv = r.t().dot(&u);
        gu.iter().chain(gv.iter()).copied().collect()
    }

    /// Entries i.i.d. uniform on `[0, 1/sqrt(r)]`.
    fn initial_point(&self) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.init_seed);
        let hi = 1.0 / (self.rank as f64).sqrt();
        Array1::from_shape_fn(self.dimension(), |_| rng.random_range(0.0..=hi))
    }
}
