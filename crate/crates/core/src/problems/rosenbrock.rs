use ndarray::{array, Array1, ArrayView1};

use super::Problem;

/// `F(u, v) = 100 (u - v^2)^2 + (1 - v)^2`, minimized at `(1, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock;

pub fn rosenbrock_objective() -> Rosenbrock {
    Rosenbrock
}

impl Rosenbrock {
    /// Smallest Hessian eigenvalue at the minimizer: the Hessian there is
    /// `[[200, -400], [-400, 802]]`.
    pub fn curvature_at_minimizer() -> f64 {
        let (tr, det) = (1002.0_f64, 400.0_f64);
        // stable smaller root of t^2 - tr t + det
        2.0 * det / (tr + (tr * tr - 4.0 * det).sqrt())
    }
}

impl Problem for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        let (u, v) = (x[0], x[1]);
        100.0 * (u - v * v).powi(2) + (1.0 - v).powi(2)
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let (u, v) = (x[0], x[1]);
        let r = u - v * v;
        array![200.0 * r, -400.0 * v * r - 2.0 * (1.0 - v)]
    }

    /// Local strong convexity at the minimizer, used as AGD's `m`.
    fn strong_convexity_hint(&self) -> Option<f64> {
        Some(Self::curvature_at_minimizer())
    }

    fn known_optimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let f = rosenbrock_objective();
        assert_eq!(f.value(array![0.0, 0.0].view()), 1.0);
        assert_eq!(f.value(array![1.0, 1.0].view()), 0.0);
        assert_eq!(f.gradient(array![1.0, 1.0].view()), array![0.0, 0.0]);
        assert_eq!(f.gradient(array![0.0, 0.0].view()), array![0.0, -2.0]);
    }

    #[test]
    fn curvature_root() {
        let m = Rosenbrock::curvature_at_minimizer();
        // m (1002 - m) = 400
        assert!((m * (1002.0 - m) - 400.0).abs() < 1e-9);
        assert!(m > 0.39 && m < 0.4);
    }
}
