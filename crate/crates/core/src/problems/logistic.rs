use ndarray::{Array1, ArrayView1};

use super::{check_len, lipschitz_bound, Design, Problem, ProblemError};

/// L2-regularized binary logistic regression averaged over `n` samples.
#[derive(Debug, Clone)]
pub struct Logistic {
    a: Design,
    labels: Array1<f64>,
    gamma: f64,
    data_lipschitz: Option<f64>,
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logistic_objective(
    a: impl Into<Design>,
    labels: Array1<f64>,
    gamma: f64,
) -> Result<Logistic, ProblemError> {
    Logistic::new(a.into(), labels, gamma)
}

impl Logistic {
    pub fn new(a: Design, labels: Array1<f64>, gamma: f64) -> Result<Self, ProblemError> {
        check_len("label vector", labels.len(), a.n_rows())?;
        if a.n_rows() == 0 {
            return Err(ProblemError::DegenerateInput("no samples".into()));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(ProblemError::InvalidParameter(format!("label {bad} is not in {{0,1}}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(ProblemError::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        let data_lipschitz = lipschitz_bound(&a, labels.len()).ok();
        Ok(Self {
            a,
            labels,
            gamma,
            data_lipschitz,
        })
    }

    /// Sets `gamma = L_bar / (10 n)`, where `L_bar` bounds the smoothness of
    /// the data term.
    pub fn with_default_regularization(a: Design, labels: Array1<f64>) -> Result<Self, ProblemError> {
        let n = labels.len();
        let l_bar = lipschitz_bound(&a, n)?;
        Self::new(a, labels, l_bar / (10.0 * n as f64))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    /// `L_bar = lambda_max(A^T A) / (4 n)`, absent for a zero data matrix.
    pub fn data_lipschitz(&self) -> Option<f64> {
        self.data_lipschitz
    }
}

impl Problem for Logistic {
    fn name(&self) -> &str {
        "logistic"
    }

    fn dimension(&self) -> usize {
        self.a.n_cols()
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        let z = self.a.apply(x);
        let n = self.labels.len() as f64;
        // -[y log s(z) + (1-y) log(1-s(z))] = log(1+e^z) - y z
        let loss: f64 = z
            .iter()
            .zip(self.labels.iter())
            .map(|(&zi, &yi)| softplus(zi) - yi * zi)
            .sum();
        loss / n + 0.5 * self.gamma * x.dot(&x)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let z = self.a.apply(x);
        let n = self.labels.len() as f64;
        let residual = Array1::from_shape_fn(z.len(), |i| sigmoid(z[i]) - self.labels[i]);
        let mut g = self.a.apply_transpose(residual.view()) / n;
        g.scaled_add(self.gamma, &x);
        g
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.data_lipschitz
    }

    fn strong_convexity_hint(&self) -> Option<f64> {
        (self.gamma > 0.0).then_some(self.gamma)
    }
}
