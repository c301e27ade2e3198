//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use abls::datasets::{synth_linear_inverse, synth_logistic, synth_ratings};
use abls::linesearch::{backtrack, ArmijoContext, ArmijoCriterion, BacktrackConfig, LineSearchResult};
use abls::problems::{Lasso, Logistic, MatrixFactorization, Problem, ProblemError, Rosenbrock};
use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

pub fn random_vector(r: &mut ChaCha8Rng, dim: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| scale * gaussian(r))
}

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Largest eigenvalue of a symmetric matrix, computed by nalgebra.
pub fn max_eigenvalue(q: &Array2<f64>) -> f64 {
    to_nalgebra(q).symmetric_eigenvalues().max()
}

/// `lambda_max(A^T A)` computed by nalgebra.
pub fn gram_max_eigenvalue(a: &Array2<f64>) -> f64 {
    max_eigenvalue(&a.t().dot(a))
}

/// `1/2 x^T Q x + b^T x` with a stored starting point.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub q: Array2<f64>,
    pub b: Array1<f64>,
    pub lipschitz: f64,
    pub x0: Array1<f64>,
}

impl Problem for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        0.5 * x.dot(&self.q.dot(&x)) + self.b.dot(&x)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.q.dot(&x) + &self.b
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn initial_point(&self) -> Array1<f64> {
        self.x0.clone()
    }
}

/// Random positive definite quadratic with condition number `kappa` and a
/// random eigenbasis. The smoothness constant comes from nalgebra.
pub fn spd_quadratic(r: &mut ChaCha8Rng, dim: usize, kappa: f64, zero_linear: bool) -> Quadratic {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(r));
    let basis = g.qr().q();
    let scale = log_uniform(r, 0.1, 10.0);
    let eig: Vec<f64> = (0..dim)
        .map(|i| match i {
            0 => 1.0,
            1 => kappa,
            _ => log_uniform(r, 1.0, kappa),
        })
        .map(|e| scale * e)
        .collect();
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig));
    let qm = &basis * diag * basis.transpose();
    let q = Array2::from_shape_fn((dim, dim), |(i, j)| 0.5 * (qm[(i, j)] + qm[(j, i)]));
    let b = if zero_linear {
        Array1::zeros(dim)
    } else {
        random_vector(r, dim, 1.0)
    };
    let lipschitz = max_eigenvalue(&q);
    Quadratic {
        q,
        b,
        lipschitz,
        x0: Array1::zeros(dim),
    }
}

/// A convex smooth objective and an upper bound on its smoothness constant.
pub struct ConvexInstance {
    pub problem: Box<dyn Problem>,
    pub lipschitz: f64,
}

impl ConvexInstance {
    /// Negative gradient, or a perturbation of it that stays a descent
    /// direction.
    pub fn descent_direction(&self, r: &mut ChaCha8Rng, g: &Array1<f64>) -> Array1<f64> {
        if r.random_bool(0.5) {
            return -g;
        }
        let u = random_vector(r, g.len(), 1.0);
        let norm = g.dot(g).sqrt();
        -g + &(0.5 * norm / u.dot(&u).sqrt() * &u)
    }
}

/// Alternates random quadratics and small regularized logistic problems.
pub fn random_convex(r: &mut ChaCha8Rng, index: u64) -> ConvexInstance {
    if index % 2 == 0 {
        let dim = r.random_range(2..10);
        let kappa = log_uniform(r, 1.0, 1e3);
        let q = spd_quadratic(r, dim, kappa, false);
        ConvexInstance {
            lipschitz: q.lipschitz,
            problem: Box::new(q),
        }
    } else {
        let (n, d) = (r.random_range(10..40), r.random_range(2..8));
        let (ds, _) = synth_logistic(n, d, index).expect("synthetic data");
        let gamma = r.random_range(0.0..0.1);
        let dense = ds.to_dense();
        let lipschitz = gram_max_eigenvalue(&dense) / (4.0 * n as f64) + gamma;
        let problem = Logistic::new(ds.design(), ds.label_array(), gamma).expect("logistic problem");
        ConvexInstance {
            problem: Box::new(problem),
            lipschitz,
        }
    }
}

/// One Armijo call along `d` from `x`.
pub fn armijo_search(
    problem: &dyn Problem,
    x: &Array1<f64>,
    g: &Array1<f64>,
    d: &Array1<f64>,
    cfg: &BacktrackConfig,
) -> LineSearchResult {
    let base = problem.value(x.view());
    let eval = |a: f64| problem.value((x + &(a * d)).view());
    let mut crit = ArmijoCriterion::new(ArmijoContext::new(base, g.dot(d), eval), cfg.c).expect("armijo criterion");
    backtrack(&mut crit, cfg).expect("line search")
}

/// Central differences of the smooth part with step `1e-6 (1 + |x_i|)`.
pub fn fd_gradient(problem: &dyn Problem, x: &Array1<f64>) -> Array1<f64> {
    let mut probe = x.clone();
    Array1::from_shape_fn(x.len(), |i| {
        let h = 1e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = problem.smooth_value(probe.view());
        probe[i] = x[i] - h;
        let down = problem.smooth_value(probe.view());
        probe[i] = x[i];
        (up - down) / (2.0 * h)
    })
}

/// `|a - b| / max(|a|, |b|)`.
pub fn normwise_error(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let diff = a - b;
    let scale = a.dot(a).sqrt().max(b.dot(b).sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff.dot(&diff).sqrt() / scale
    }
}

/// One instance of every objective family with a sampling scale for points.
pub fn test_problems(seed: u64) -> Result<Vec<(&'static str, Box<dyn Problem>, f64)>, ProblemError> {
    let (ds, _) = synth_logistic(100, 20, seed).expect("synthetic logistic data");
    let logistic = Logistic::with_default_regularization(ds.design(), ds.label_array())?;
    let inst = synth_linear_inverse(50, 80, 8, 0.01, seed).expect("synthetic lasso data");
    let lasso = Lasso::new(inst.a.into(), inst.y, 0.1)?;
    let ratings = synth_ratings(30, 20, 0.3, seed).expect("synthetic ratings");
    let factorization = MatrixFactorization::new(ratings, 4, seed)?;
    Ok(vec![
        ("logistic", Box::new(logistic), 1.0),
        ("lasso", Box::new(lasso), 1.0),
        ("rosenbrock", Box::new(Rosenbrock), 1.0),
        ("matrix-factorization", Box::new(factorization), 0.5),
    ])
}
