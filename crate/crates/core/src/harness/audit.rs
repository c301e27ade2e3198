//! Finite-difference gradient audits and the worked line-search examples.

use ndarray::{Array1, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use super::config::ProblemKind;
use super::HarnessError;
use crate::datasets::{synth_linear_inverse, synth_logistic, synth_ratings};
use crate::linesearch::{backtrack, ArmijoContext, ArmijoCriterion, BacktrackConfig, Criterion};
use crate::problems::{example_objectives, Lasso, Logistic, MatrixFactorization, Problem, Rosenbrock};

/// Relative error allowed between analytic and finite-difference gradients.
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

/// Central differences with step `1e-6 (1 + |x_i|)` per coordinate.
pub fn finite_difference_gradient(problem: &dyn Problem, x: ArrayView1<f64>) -> Array1<f64> {
    let mut probe = x.to_owned();
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

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let norm = |v: ArrayView1<f64>| v.dot(&v).sqrt();
    let diff = norm((&a - &b).view());
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub problem: String,
    pub points: usize,
    pub max_relative_error: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error <= GRADIENT_TOLERANCE
    }
}

/// Compares the analytic gradient with central differences at `points`.
pub fn gradient_audit(problem: &dyn Problem, points: &[Array1<f64>]) -> AuditReport {
    let max_relative_error = points
        .iter()
        .map(|x| relative_error(problem.gradient(x.view()).view(), finite_difference_gradient(problem, x.view()).view()))
        .fold(0.0, f64::max);
    AuditReport {
        problem: problem.name().to_string(),
        points: points.len(),
        max_relative_error,
    }
}

/// `count` Gaussian points of standard deviation `scale`.
pub fn random_points(dimension: usize, count: usize, scale: f64, seed: u64) -> Vec<Array1<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Array1::from_shape_fn(dimension, |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        }))
        .collect()
}

/// Small instance of each objective family for auditing.
pub fn audit_instance(kind: ProblemKind, seed: u64) -> Result<Box<dyn Problem>, HarnessError> {
    Ok(match kind {
        ProblemKind::Logistic => {
            let (ds, _) = synth_logistic(60, 12, seed)?;
            Box::new(Logistic::with_default_regularization(ds.design(), ds.label_array())?)
        }
        ProblemKind::Lasso => {
            let inst = synth_linear_inverse(30, 50, 5, 0.01, seed)?;
            Box::new(Lasso::new(inst.a.into(), inst.y, 0.1)?)
        }
        ProblemKind::Rosenbrock => Box::new(Rosenbrock),
        ProblemKind::MatrixFactorization => {
            let a = synth_ratings(20, 15, 0.3, seed)?;
            Box::new(MatrixFactorization::new(a, 3, seed)?)
        }
    })
}

/// Audits the small instance of `kind` at `count` random points.
pub fn audit_problem(kind: ProblemKind, count: usize, seed: u64) -> Result<AuditReport, HarnessError> {
    let problem = audit_instance(kind, seed)?;
    let points = random_points(problem.dimension(), count, 1.0, seed.wrapping_add(1));
    Ok(gradient_audit(problem.as_ref(), &points))
}

/// One check of a worked example.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleCheck {
    pub name: &'static str,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

fn check(name: &'static str, expected: String, observed: String, passed: bool) -> ExampleCheck {
    ExampleCheck {
        name,
        expected,
        observed,
        passed,
    }
}

/// Armijo search along `d` from `x` on a scalar objective.
fn scalar_search(
    problem: &dyn Problem,
    x: f64,
    d: f64,
    c: f64,
    cfg: &BacktrackConfig,
) -> Result<(f64, usize), HarnessError> {
    let base = problem.value(ndarray::arr1(&[x]).view());
    let slope = problem.gradient(ndarray::arr1(&[x]).view())[0] * d;
    let eval = |alpha: f64| problem.value(ndarray::arr1(&[x + alpha * d]).view());
    let mut crit = ArmijoCriterion::new(ArmijoContext::new(base, slope, eval), c)?;
    let res = backtrack(&mut crit, &cfg.with_c(c))?;
    Ok((res.accepted_alpha, res.criterion_evals))
}

fn scalar_feasible(problem: &dyn Problem, x: f64, d: f64, c: f64, alpha: f64) -> Result<bool, HarnessError> {
    let base = problem.value(ndarray::arr1(&[x]).view());
    let slope = problem.gradient(ndarray::arr1(&[x]).view())[0] * d;
    let eval = |a: f64| problem.value(ndarray::arr1(&[x + a * d]).view());
    let mut crit = ArmijoCriterion::new(ArmijoContext::new(base, slope, eval), c)?;
    Ok(crit.probe(alpha).feasible)
}

/// Exact outcomes of the two worked backtracking examples.
pub fn replicate_examples() -> Result<Vec<ExampleCheck>, HarnessError> {
    let (square, tilted) = example_objectives();
    let mut out = Vec::new();

    // x^2 from -1 along d = 2 with c = 1/4 and alpha0 = 1
    let step_check = |name, cfg: BacktrackConfig, alpha: f64, evals: usize| -> Result<ExampleCheck, HarnessError> {
        let (a, e) = scalar_search(&square, -1.0, 2.0, 0.25, &cfg)?;
        Ok(check(
            name,
            format!("alpha={alpha} evals={evals}"),
            format!("alpha={a} evals={e}"),
            (a - alpha).abs() <= 1e-12 && e == evals,
        ))
    };
    out.push(step_check("square/regular rho=0.75", BacktrackConfig::regular(0.75, 1.0), 0.75, 2)?);
    out.push(step_check("square/regular rho=0.8", BacktrackConfig::regular(0.8, 1.0), 0.64, 3)?);
    out.push(step_check("square/adaptive rho=0.8", BacktrackConfig::adaptive(0.8, 1.0), 0.6, 2)?);

    // cos x - a x from pi/2 along the negative gradient; s = (1 + a) alpha is
    // the distance travelled
    let slope_scale = 1.0 + tilted.tilt;
    let (x0, c) = (PI / 2.0, 1.0 / (2.0 * PI));
    let to_alpha = |s: f64| s / slope_scale;
    let feasible_at = |s: f64| scalar_feasible(&tilted, x0, slope_scale, c, to_alpha(s));
    let (f3, f2) = (feasible_at(5.0 * PI / 2.0)?, feasible_at(3.0 * PI / 2.0)?);
    out.push(check("tilted/reach 3pi", "feasible".into(), feasibility(f3).into(), f3));
    out.push(check("tilted/reach 2pi", "infeasible".into(), feasibility(f2).into(), !f2));
    let alpha0 = to_alpha(7.0 * PI / 2.0);
    for (name, rho, evals) in [("tilted/regular rho=5/7", 5.0 / 7.0, 2), ("tilted/regular rho=3/7", 3.0 / 7.0, 3)] {
        let (_, e) = scalar_search(&tilted, x0, slope_scale, c, &BacktrackConfig::regular(rho, alpha0))?;
        out.push(check(name, format!("evals={evals}"), format!("evals={e}"), e == evals));
    }
    Ok(out)
}

fn feasibility(ok: bool) -> &'static str {
    if ok {
        "feasible"
    } else {
        "infeasible"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_replicate() {
        let checks = replicate_examples().unwrap();
        assert_eq!(checks.len(), 7);
        for c in checks {
            assert!(c.passed, "{}: expected {}, observed {}", c.name, c.expected, c.observed);
        }
    }

    #[test]
    fn audits_pass_on_every_family() {
        for kind in [
            ProblemKind::Logistic,
            ProblemKind::Lasso,
            ProblemKind::Rosenbrock,
            ProblemKind::MatrixFactorization,
        ] {
            let report = audit_problem(kind, 5, 3).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn audit_catches_wrong_gradient() {
        struct Wrong;
        impl Problem for Wrong {
            fn name(&self) -> &str {
                "wrong"
            }
            fn dimension(&self) -> usize {
                2
            }
            fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
                x.dot(&x)
            }
            fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
                x.to_owned()
            }
        }
        let report = gradient_audit(&Wrong, &random_points(2, 3, 1.0, 0));
        assert!(!report.passed());
    }
}
