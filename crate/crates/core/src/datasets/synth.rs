//! Seeded synthetic instances. Every generator is a pure function of its
//! parameters and seed.

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DatasetError, SparseDataset};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Standard Gaussian features, labels drawn from `sigmoid(a^T w*)`, and a
/// planted `w* ~ N(0, (4/d) I)` so that margins have unit-order spread.
pub fn synth_logistic(n: usize, d: usize, seed: u64) -> Result<(SparseDataset, Array1<f64>), DatasetError> {
    if n == 0 || d == 0 {
        return Err(DatasetError::InvalidParameter("n and d must be at least 1".into()));
    }
    // the weights use their own stream so features do not depend on them
    let mut wrng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let scale = 2.0 / (d as f64).sqrt();
    let w = Array1::from_shape_fn(d, |_| scale * gaussian(&mut wrng));
    let ds = synth_logistic_with_weights(n, w.view(), seed)?;
    Ok((ds, w))
}

/// Same as [`synth_logistic`] with a given planted weight vector.
pub fn synth_logistic_with_weights(n: usize, w: ArrayView1<f64>, seed: u64) -> Result<SparseDataset, DatasetError> {
    let d = w.len();
    if n == 0 || d == 0 {
        return Err(DatasetError::InvalidParameter("n and d must be at least 1".into()));
    }
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<(usize, f64)> = (0..d).map(|j| (j, gaussian(&mut r))).collect();
        let margin: f64 = row.iter().map(|&(j, v)| v * w[j]).sum();
        let u: f64 = r.random();
        labels.push(if u < sigmoid(margin) { 1.0 } else { 0.0 });
        rows.push(row);
    }
    SparseDataset::new(rows, labels, d)
}

/// `y = A x* + noise * e` with Gaussian `A` of entry variance `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInverse {
    pub a: Array2<f64>,
    pub y: Array1<f64>,
    pub x_star: Array1<f64>,
}

/// Sparse linear measurement instance: `x*` has `sparsity` nonzeros at
/// uniformly sampled positions with standard Gaussian values.
pub fn synth_linear_inverse(
    n: usize,
    d: usize,
    sparsity: usize,
    noise: f64,
    seed: u64,
) -> Result<LinearInverse, DatasetError> {
    if n == 0 || d == 0 {
        return Err(DatasetError::InvalidParameter("n and d must be at least 1".into()));
    }
    if sparsity > d {
        return Err(DatasetError::InvalidParameter(format!("sparsity {sparsity} exceeds d = {d}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(DatasetError::InvalidParameter(format!("noise must be >= 0, got {noise}")));
    }
    let mut r = rng(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let a = Array2::from_shape_fn((n, d), |_| scale * gaussian(&mut r));
    let mut x_star = Array1::zeros(d);
    let mut support = sample(&mut r, d, sparsity).into_vec();
    support.sort_unstable();
    for j in support {
        x_star[j] = gaussian(&mut r);
    }
    let mut y = a.dot(&x_star);
    if noise > 0.0 {
        y.mapv_inplace(|v| v + noise * gaussian(&mut r));
    }
    Ok(LinearInverse { a, y, x_star })
}

/// Ratings-like `m x n` matrix: each entry is observed with probability
/// `density` and then holds an integer rating in `1..=5`; unobserved entries
/// are zero.
pub fn synth_ratings(m: usize, n: usize, density: f64, seed: u64) -> Result<Array2<f64>, DatasetError> {
    if m == 0 || n == 0 {
        return Err(DatasetError::InvalidParameter("matrix dimensions must be at least 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(DatasetError::InvalidParameter(format!("density must lie in (0,1], got {density}")));
    }
    let mut r = rng(seed);
    Ok(Array2::from_shape_fn((m, n), |_| {
        let observed = r.random::<f64>() < density;
        let rating = r.random_range(1..=5) as f64;
        if observed {
            rating
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_deterministic() {
        let (a, wa) = synth_logistic(30, 4, 11).unwrap();
        let (b, wb) = synth_logistic(30, 4, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(wa, wb);
        let (c, _) = synth_logistic(30, 4, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn logistic_single_row() {
        let (ds, _) = synth_logistic(1, 7, 0).unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.d(), 7);
        assert!(synth_logistic(0, 3, 0).is_err());
    }

    #[test]
    fn zero_weights_give_balanced_labels() {
        let n = 20_000;
        let ds = synth_logistic_with_weights(n, Array1::zeros(3).view(), 5).unwrap();
        let mean = ds.labels().iter().sum::<f64>() / n as f64;
        // Bernoulli(1/2) mean has standard deviation 1/(2 sqrt n)
        let sigma = 0.5 / (n as f64).sqrt();
        assert!((mean - 0.5).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn noiseless_square_system_is_exact() {
        let inst = synth_linear_inverse(8, 5, 5, 0.0, 3).unwrap();
        let r = &inst.y - &inst.a.dot(&inst.x_star);
        assert_eq!(r.iter().map(|v| v.abs()).fold(0.0, f64::max), 0.0);
        assert_eq!(inst.x_star.iter().filter(|v| **v != 0.0).count(), 5);
    }

    #[test]
    fn linear_inverse_sparsity_and_seed() {
        let a = synth_linear_inverse(16, 40, 6, 0.1, 9).unwrap();
        assert_eq!(a, synth_linear_inverse(16, 40, 6, 0.1, 9).unwrap());
        assert_eq!(a.x_star.iter().filter(|v| **v != 0.0).count(), 6);
        assert!(synth_linear_inverse(4, 3, 4, 0.0, 0).is_err());
    }

    #[test]
    fn residual_norm_concentrates() {
        let (n, noise) = (2000, 0.3);
        let inst = synth_linear_inverse(n, 10, 3, noise, 21).unwrap();
        let r = &inst.y - &inst.a.dot(&inst.x_star);
        let norm = r.dot(&r).sqrt() / noise;
        // chi with n degrees of freedom: mean about sqrt(n - 1/2), sd about 1/sqrt 2
        let mean = (n as f64 - 0.5).sqrt();
        assert!((norm - mean).abs() <= 3.0 / 2f64.sqrt(), "{norm} vs {mean}");
    }

    #[test]
    fn ratings_range() {
        let a = synth_ratings(20, 30, 0.2, 1).unwrap();
        assert!(a.iter().all(|v| *v == 0.0 || (1.0..=5.0).contains(v)));
        let observed = a.iter().filter(|v| **v != 0.0).count();
        assert!(observed > 60 && observed < 180);
        assert_eq!(a, synth_ratings(20, 30, 0.2, 1).unwrap());
    }
}
