//! Objective families with analytic gradients.
//!
//! Composite objectives `F = f + psi` report `F` from [`Problem::value`], `f`
//! from [`Problem::smooth_value`] and `grad f` from [`Problem::gradient`]; the
//! nonsmooth term and its proximal map come from [`Problem::nonsmooth`].

mod design;
mod factorization;
mod lasso;
mod logistic;
mod rosenbrock;
mod scalar;

pub use design::{lipschitz_bound, CsrMatrix, Design, POWER_ITERATION_CAP, POWER_ITERATION_TOL};
pub use factorization::MatrixFactorization;
pub use lasso::{lasso_objective, Lasso};
pub use logistic::{logistic_objective, Logistic};
pub use rosenbrock::{rosenbrock_objective, Rosenbrock};
pub use scalar::{example_objectives, Square, TiltedCosine};

use ndarray::{Array1, ArrayView1};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),
    #[error("rank {rank} outside 1..{limit}")]
    RankOutOfRange { rank: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A nonsmooth convex term `psi`.
pub trait Nonsmooth: Send + Sync {
    fn value(&self, x: ArrayView1<f64>) -> f64;

    /// `argmin_u psi(u) + |u - z|^2 / (2 step)`, or `None` when no closed form
    /// is registered.
    fn prox(&self, z: ArrayView1<f64>, step: f64) -> Option<Array1<f64>>;
}

/// `lambda |x|_1` with soft-thresholding as its proximal map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Norm {
    pub lambda: f64,
}

impl Nonsmooth for L1Norm {
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, z: ArrayView1<f64>, step: f64) -> Option<Array1<f64>> {
        Some(soft_threshold(z, self.lambda * step))
    }
}

/// Componentwise `sign(z) max(|z| - level, 0)`.
pub fn soft_threshold(z: ArrayView1<f64>, level: f64) -> Array1<f64> {
    z.mapv(|v| v.signum() * (v.abs() - level).max(0.0))
}

/// An objective with the capabilities the optimizers need.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    /// Smooth part `f`; the whole objective when there is no nonsmooth term.
    fn smooth_value(&self, x: ArrayView1<f64>) -> f64;

    /// Gradient of the smooth part.
    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64>;

    fn nonsmooth(&self) -> Option<&dyn Nonsmooth> {
        None
    }

    /// Full objective `f + psi`.
    fn value(&self, x: ArrayView1<f64>) -> f64 {
        let smooth = self.smooth_value(x);
        match self.nonsmooth() {
            Some(psi) => smooth + psi.value(x),
            None => smooth,
        }
    }

    /// Upper bound on the smoothness constant used to anchor step sizes.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    /// Strong convexity constant, when one is known.
    fn strong_convexity_hint(&self) -> Option<f64> {
        None
    }

    /// Exact optimal value, when known analytically.
    fn known_optimum(&self) -> Option<f64> {
        None
    }

    fn initial_point(&self) -> Array1<f64> {
        Array1::zeros(self.dimension())
    }
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<(), ProblemError> {
    if got != want {
        return Err(ProblemError::DimensionMismatch(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn soft_threshold_closed_form() {
        let z = array![1.2, -0.3];
        let p = soft_threshold(z.view(), 0.5);
        assert!((p[0] - 0.7).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
        assert_eq!(soft_threshold(z.view(), 0.0), z);
    }

    #[test]
    fn l1_prox_scales_with_step() {
        let psi = L1Norm { lambda: 0.25 };
        let z = array![1.2, -0.3];
        assert_eq!(psi.prox(z.view(), 2.0).unwrap(), soft_threshold(z.view(), 0.5));
        assert!((psi.value(z.view()) - 0.375).abs() < 1e-15);
    }
}
