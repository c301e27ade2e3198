use ndarray::{Array1, ArrayView1};

use super::{check_len, Design, L1Norm, Nonsmooth, Problem, ProblemError};

/// `1/2 |A x - y|^2 + lambda |x|_1`.
#[derive(Debug, Clone)]
pub struct Lasso {
    a: Design,
    y: Array1<f64>,
    l1: L1Norm,
    lipschitz: Option<f64>,
}

pub fn lasso_objective(a: impl Into<Design>, y: Array1<f64>, lambda: f64) -> Result<Lasso, ProblemError> {
    Lasso::new(a.into(), y, lambda)
}

impl Lasso {
    pub fn new(a: Design, y: Array1<f64>, lambda: f64) -> Result<Self, ProblemError> {
        check_len("observation vector", y.len(), a.n_rows())?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ProblemError::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        let lipschitz = a.gram_spectral_radius().ok();
        Ok(Self {
            a,
            y,
            l1: L1Norm { lambda },
            lipschitz,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.l1.lambda
    }

    /// `|A^T y|_inf`, the smallest `lambda` for which zero is optimal.
    pub fn lambda_max(a: &Design, y: ArrayView1<f64>) -> f64 {
        a.apply_transpose(y).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Problem for Lasso {
    fn name(&self) -> &str {
        "lasso"
    }

    fn dimension(&self) -> usize {
        self.a.n_cols()
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        let r = self.a.apply(x) - &self.y;
        0.5 * r.dot(&r)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let r = self.a.apply(x) - &self.y;
        self.a.apply_transpose(r.view())
    }

    fn nonsmooth(&self) -> Option<&dyn Nonsmooth> {
        Some(&self.l1)
    }

    /// `lambda_max(A^T A)`.
    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }
}
