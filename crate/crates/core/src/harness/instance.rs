//! Turns a configuration into a concrete objective with its step scale,
//! baseline step and reference optimum.

use ndarray::{Array1, ArrayView1};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::config::{ExperimentConfig, ProblemKind};
use super::HarnessError;
use crate::datasets::{
    load_dataset, parse_rating_triplets, resolve_data_dir, synth_linear_inverse, synth_logistic, synth_ratings,
    DatasetError,
};
use crate::linesearch::BacktrackConfig;
use crate::optimizers::{run, Method, RunOptions, StepSource, Stopping};
use crate::problems::{lipschitz_bound, Design, Lasso, Logistic, MatrixFactorization, Problem, ProblemError, Rosenbrock};

/// Stationarity threshold of the reference solver, measured on the gradient
/// mapping `L (y - prox(y - grad f(y) / L))`.
pub const REFERENCE_TOLERANCE: f64 = 1e-10;

/// File holding MovieLens ratings inside the data directory.
pub const MOVIELENS_FILE: &str = "u.data";

/// A configured objective ready to be optimized.
pub struct Instance {
    pub problem: Box<dyn Problem>,
    /// Smoothness bound that `alpha0_multipliers` are divided by.
    pub step_scale: Option<f64>,
    /// Default step of the fixed-step baseline.
    pub baseline_step: Option<f64>,
    /// Full smoothness constant of the objective, when known.
    pub lipschitz: Option<f64>,
    /// Strong convexity constant passed to AGD.
    pub strong_convexity: Option<f64>,
}

impl Instance {
    /// Initial steps of the grid.
    pub fn alpha0_grid(&self, cfg: &ExperimentConfig) -> Result<Vec<f64>, HarnessError> {
        if let Some(values) = &cfg.alpha0_values {
            return Ok(values.clone());
        }
        match cfg.problem {
            ProblemKind::Rosenbrock => return Ok(vec![0.1]),
            ProblemKind::MatrixFactorization => return Ok(vec![0.05, 0.5, 5.0, 50.0]),
            _ => {}
        }
        let scale = self
            .step_scale
            .filter(|s| *s > 0.0 && s.is_finite())
            .ok_or_else(|| HarnessError::Config("no smoothness bound to scale `alpha0_multipliers`; set `alpha0_values`".into()))?;
        Ok(cfg.alpha0_multipliers.iter().map(|m| m / scale).collect())
    }

    /// `F*`: analytic when known, else from [`reference_optimum`].
    pub fn reference(&self, cfg: &ExperimentConfig) -> Result<f64, HarnessError> {
        if let Some(v) = self.problem.known_optimum() {
            return Ok(v);
        }
        let budget = cfg.max_iterations.saturating_mul(cfg.reference_budget_factor).max(1);
        match (cfg.problem, self.lipschitz) {
            (ProblemKind::Logistic | ProblemKind::Lasso, Some(l)) => Ok(reference_optimum(self.problem.as_ref(), l, budget)),
            _ => nonconvex_reference(self.problem.as_ref(), budget),
        }
    }
}

fn data_dir(flag: Option<&Path>) -> Result<std::path::PathBuf, HarnessError> {
    resolve_data_dir(flag).ok_or_else(|| HarnessError::Dataset(DatasetError::MissingDataDir))
}

/// Builds the objective named by `cfg`.
pub fn build_instance(cfg: &ExperimentConfig, data_dir_flag: Option<&Path>) -> Result<Instance, HarnessError> {
    match cfg.problem {
        ProblemKind::Logistic => {
            let ds = if cfg.is_synthetic() {
                synth_logistic(cfg.n, cfg.d, cfg.seed)?.0
            } else {
                load_dataset(&cfg.dataset, &data_dir(data_dir_flag)?)?
            };
            let (design, labels) = (ds.design(), ds.label_array());
            let l_bar = lipschitz_bound(&design, labels.len())?;
            let gamma = cfg.gamma.unwrap_or(l_bar / (10.0 * labels.len() as f64));
            let problem = Logistic::new(design, labels, gamma)?;
            let lipschitz = l_bar + gamma;
            Ok(Instance {
                problem: Box::new(problem),
                step_scale: Some(l_bar),
                baseline_step: Some(1.0 / lipschitz),
                lipschitz: Some(lipschitz),
                strong_convexity: cfg.m.or((gamma > 0.0).then_some(gamma)),
            })
        }
        ProblemKind::Lasso => {
            let inst = synth_linear_inverse(cfg.n, cfg.d, cfg.sparsity, cfg.noise, cfg.seed)?;
            let design = Design::Dense(inst.a);
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => 0.1 * Lasso::lambda_max(&design, inst.y.view()),
            };
            let problem = Lasso::new(design, inst.y, lambda)?;
            let lipschitz = problem
                .lipschitz_hint()
                .ok_or_else(|| ProblemError::ConvergenceFailure("spectral radius did not converge".into()))?;
            Ok(Instance {
                problem: Box::new(problem),
                step_scale: Some(lipschitz),
                baseline_step: Some(1.0 / lipschitz),
                lipschitz: Some(lipschitz),
                strong_convexity: cfg.m,
            })
        }
        ProblemKind::Rosenbrock => Ok(Instance {
            problem: Box::new(Rosenbrock),
            step_scale: None,
            baseline_step: None,
            lipschitz: None,
            strong_convexity: cfg.m.or(Rosenbrock.strong_convexity_hint()),
        }),
        ProblemKind::MatrixFactorization => {
            let a = if cfg.is_synthetic() {
                synth_ratings(cfg.n, cfg.d, cfg.density, cfg.seed)?
            } else {
                let path = data_dir(data_dir_flag)?.join(MOVIELENS_FILE);
                let file = File::open(&path).map_err(DatasetError::Io)?;
                parse_rating_triplets(BufReader::new(file))?
            };
            let problem = MatrixFactorization::new(a, cfg.rank, cfg.seed)?;
            Ok(Instance {
                problem: Box::new(problem),
                step_scale: None,
                baseline_step: None,
                lipschitz: None,
                strong_convexity: cfg.m,
            })
        }
    }
}

fn prox_or_identity(problem: &dyn Problem, z: Array1<f64>, step: f64) -> Array1<f64> {
    match problem.nonsmooth() {
        Some(psi) => psi.prox(z.view(), step).unwrap_or(z),
        None => z,
    }
}

fn norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Minimum objective found by accelerated proximal gradient with step
/// `1/lipschitz` and function-value restarts, run until the gradient mapping
/// falls below [`REFERENCE_TOLERANCE`] or `budget` iterations pass.
pub fn reference_optimum(problem: &dyn Problem, lipschitz: f64, budget: usize) -> f64 {
    let step = 1.0 / lipschitz;
    let mut x = problem.initial_point();
    let mut fx = problem.value(x.view());
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut best = fx;
    for _ in 0..budget {
        let g = problem.gradient(y.view());
        let x_next = prox_or_identity(problem, &y - &(step * &g), step);
        if lipschitz * norm((&y - &x_next).view()) <= REFERENCE_TOLERANCE {
            best = best.min(problem.value(x_next.view()));
            break;
        }
        let f_next = problem.value(x_next.view());
        if !f_next.is_finite() {
            break;
        }
        if f_next > fx {
            // drop the momentum and retry from the last iterate
            y = x.clone();
            if t == 1.0 {
                break;
            }
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_next + &(((t - 1.0) / t_next) * (&x_next - &x));
        x = x_next;
        fx = f_next;
        t = t_next;
        best = best.min(fx);
    }
    best
}

/// Lowest objective reached by a long adaptive gradient descent run; a proxy
/// for `F*` on nonconvex objectives.
fn nonconvex_reference(problem: &dyn Problem, budget: usize) -> Result<f64, HarnessError> {
    let cfg = BacktrackConfig::adaptive(0.3, 1.0);
    let options = RunOptions::new(Stopping::iterations(budget).with_gradient_tolerance(REFERENCE_TOLERANCE));
    let trace = run(problem, Method::Gd, &StepSource::LineSearch(cfg), &options)?;
    Ok(trace
        .rows
        .iter()
        .map(|r| r.objective)
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min))
}
