//! One-dimensional test functions with closed-form line-search behavior.

use ndarray::{array, Array1, ArrayView1};
use std::f64::consts::PI;

use super::Problem;

/// `F(x) = x^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Square;

impl Problem for Square {
    fn name(&self) -> &str {
        "square"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        x[0] * x[0]
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        array![2.0 * x[0]]
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(2.0)
    }

    fn strong_convexity_hint(&self) -> Option<f64> {
        Some(2.0)
    }

    fn known_optimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `F(x) = cos x - a x` with `a = 1 / (5 pi)` by default.
#[derive(Debug, Clone, Copy)]
pub struct TiltedCosine {
    pub tilt: f64,
}

impl Default for TiltedCosine {
    fn default() -> Self {
        Self { tilt: 1.0 / (5.0 * PI) }
    }
}

impl Problem for TiltedCosine {
    fn name(&self) -> &str {
        "tilted-cosine"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        x[0].cos() - self.tilt * x[0]
    }

    fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        array![-x[0].sin() - self.tilt]
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// The square and the tilted cosine, in that order.
pub fn example_objectives() -> (Square, TiltedCosine) {
    (Square, TiltedCosine::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn square_values() {
        let (sq, _) = example_objectives();
        assert_eq!(sq.value(array![-1.0].view()), 1.0);
        assert_eq!(sq.gradient(array![-1.0].view()), array![-2.0]);
    }

    #[test]
    fn tilted_cosine_at_half_pi() {
        let (_, tc) = example_objectives();
        let x = array![FRAC_PI_2];
        assert!((tc.value(x.view()) + 0.1).abs() < 1e-15);
        let expected = -(1.0 + 1.0 / (5.0 * PI));
        assert!((tc.gradient(x.view())[0] - expected).abs() < 1e-15);
    }
}
