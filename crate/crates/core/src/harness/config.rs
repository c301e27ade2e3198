//! Experiment configuration: a flat JSON object with defaults for every key.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::HarnessError;
use crate::datasets::lookup;
use crate::linesearch::{InitPolicy, DEFAULT_ARMIJO_C, DEFAULT_EPSILON, DEFAULT_MAX_ADJUSTMENTS};
use crate::optimizers::{FistaIndexing, Method};

/// Precision target used when the dataset has no registered target.
pub const DEFAULT_PRECISION: f64 = 1e-9;

/// Objective family of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Logistic,
    Lasso,
    Rosenbrock,
    MatrixFactorization,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Logistic => "logistic",
            ProblemKind::Lasso => "lasso",
            ProblemKind::Rosenbrock => "rosenbrock",
            ProblemKind::MatrixFactorization => "matrix-factorization",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ProblemKind::Logistic),
            "lasso" => Ok(ProblemKind::Lasso),
            "rosenbrock" => Ok(ProblemKind::Rosenbrock),
            "matrix-factorization" => Ok(ProblemKind::MatrixFactorization),
            _ => Err(format!(
                "unknown problem `{s}` (expected logistic, lasso, rosenbrock or matrix-factorization)"
            )),
        }
    }
}

/// Cost measure compared by the summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Objective evaluations.
    #[default]
    Fevals,
    /// Wall-clock seconds.
    Elapsed,
    /// Gradient evaluations.
    Gradevals,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Fevals => "fevals",
            Metric::Elapsed => "elapsed",
            Metric::Gradevals => "gradevals",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fevals" => Ok(Metric::Fevals),
            "elapsed" => Ok(Metric::Elapsed),
            "gradevals" => Ok(Metric::Gradevals),
            _ => Err(format!("unknown metric `{s}` (expected fevals, elapsed or gradevals)")),
        }
    }
}

/// Every key is optional. Unknown keys are rejected.
///
/// Step sizes: `alpha0_values` lists absolute initial steps; otherwise
/// `alpha0_multipliers` are divided by the problem's smoothness bound. The
/// bound is `L_bar` for logistic regression and `lambda_max(A^T A)` for the
/// Lasso. Rosenbrock defaults to `[0.1]` and matrix factorization to
/// `[0.05, 0.5, 5, 50]`.
///
/// Matrix factorization variables are flattened as `U` row-major followed by
/// `V` row-major; `seed` drives both the data and the initial point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// `synthetic`, a registered LIBSVM dataset name, or `movielens` (reads
    /// `u.data`) for matrix factorization.
    pub dataset: String,
    /// Synthetic rows (matrix factorization: rows of the ratings matrix).
    pub n: usize,
    /// Synthetic columns.
    pub d: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Regular-mode factors; per-method defaults when absent.
    pub rho_regular: Option<Vec<f64>>,
    /// Adaptive-mode base factor; per-method default when absent.
    pub rho_adaptive: Option<f64>,
    /// Run the regular variants.
    pub regular: bool,
    /// Run the adaptive variants.
    pub adaptive: bool,
    pub alpha0_multipliers: Vec<f64>,
    pub alpha0_values: Option<Vec<f64>>,
    /// Armijo constant; 1/2 for AGD and 1e-4 otherwise when absent.
    pub c: Option<f64>,
    pub epsilon: f64,
    /// Initial step policy of Armijo searches (FISTA is always monotone).
    pub policy: InitPolicy,
    pub max_adjustments: usize,
    /// Suboptimality target; per-dataset defaults when absent.
    pub precision: Option<f64>,
    pub max_iterations: usize,
    /// Stop each run as soon as it reaches the precision target.
    pub stop_at_precision: bool,
    /// Add a fixed-step run per method.
    pub baseline: bool,
    /// Fixed step of the baseline; `1/(L_bar + gamma)` or `1/L` when absent.
    pub baseline_step: Option<f64>,
    /// Lasso weight; `0.1 |A^T y|_inf` when absent.
    pub lambda: Option<f64>,
    /// Logistic regularization; `L_bar / (10 n)` when absent.
    pub gamma: Option<f64>,
    pub rank: usize,
    /// AGD strong convexity constant; problem default when absent.
    pub m: Option<f64>,
    pub sparsity: usize,
    pub noise: f64,
    /// Fraction of observed entries in the synthetic ratings matrix.
    pub density: f64,
    pub fista_indexing: FistaIndexing,
    /// Iteration budget of the reference run, as a multiple of `max_iterations`.
    pub reference_budget_factor: usize,
    /// Worker threads; 0 picks the number of cores.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Logistic,
            dataset: "synthetic".into(),
            n: 500,
            d: 20,
            seed: 0,
            methods: vec![Method::Gd],
            rho_regular: None,
            rho_adaptive: None,
            regular: true,
            adaptive: true,
            alpha0_multipliers: vec![1e1, 1e2, 1e3, 1e4],
            alpha0_values: None,
            c: None,
            epsilon: DEFAULT_EPSILON,
            policy: InitPolicy::Restarting,
            max_adjustments: DEFAULT_MAX_ADJUSTMENTS,
            precision: None,
            max_iterations: 10_000,
            stop_at_precision: true,
            baseline: false,
            baseline_step: None,
            lambda: None,
            gamma: None,
            rank: 10,
            m: None,
            sparsity: 10,
            noise: 0.01,
            density: 0.06,
            fista_indexing: FistaIndexing::Classical,
            reference_budget_factor: 10,
            workers: 0,
        }
    }
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn is_synthetic(&self) -> bool {
        self.dataset.eq_ignore_ascii_case("synthetic")
    }

    pub fn rho_regular_for(&self, method: Method) -> Vec<f64> {
        match (&self.rho_regular, method) {
            (Some(r), _) => r.clone(),
            (None, Method::Fista) => vec![1.0 / 2.0, 1.0 / 3.0, 1.0 / 5.0],
            (None, _) => vec![0.2, 0.3, 0.5, 0.6],
        }
    }

    pub fn rho_adaptive_for(&self, method: Method) -> f64 {
        match (self.rho_adaptive, method) {
            (Some(r), _) => r,
            (None, Method::Agd) => 0.9,
            (None, Method::Fista) => 1.0 / 1.1,
            (None, _) => 0.3,
        }
    }

    pub fn c_for(&self, method: Method) -> f64 {
        match (self.c, method) {
            (Some(c), _) => c,
            (None, Method::Agd) => 0.5,
            (None, _) => DEFAULT_ARMIJO_C,
        }
    }

    /// Explicit precision, else the dataset's registered target for the
    /// method, else [`DEFAULT_PRECISION`].
    pub fn precision_for(&self, method: Method) -> f64 {
        if let Some(p) = self.precision {
            return p;
        }
        let Some(entry) = lookup(&self.dataset) else {
            return DEFAULT_PRECISION;
        };
        let p = entry.precisions;
        match method {
            Method::Agd => p.agd,
            Method::Gd if self.policy == InitPolicy::Monotone => p.gd_monotone,
            Method::Gd => p.gd,
            Method::Adagrad => p.adagrad,
            Method::Fista => DEFAULT_PRECISION,
        }
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.methods.is_empty() {
            return bad("`methods` must name at least one method".into());
        }
        if !self.regular && !self.adaptive && !self.baseline {
            return bad("all variants are disabled".into());
        }
        for &method in &self.methods {
            let smooth_only = matches!(method, Method::Gd | Method::Agd | Method::Adagrad);
            if self.problem == ProblemKind::Lasso && smooth_only {
                return bad(format!("{method} cannot handle the nonsmooth Lasso term; use fista"));
            }
            if method == Method::Agd
                && self.problem == ProblemKind::MatrixFactorization
                && self.m.is_none()
            {
                return bad("agd on matrix factorization needs `m`".into());
            }
            if self.regular {
                let rhos = self.rho_regular_for(method);
                if rhos.is_empty() {
                    return bad("`rho_regular` is empty; set `regular` to false instead".into());
                }
                if let Some(r) = rhos.iter().find(|r| !in_unit_interval(**r)) {
                    return bad(format!("rho {r} is outside (0,1)"));
                }
            }
            if self.adaptive {
                let rho = self.rho_adaptive_for(method);
                if !in_unit_interval(rho) {
                    return bad(format!("rho {rho} is outside (0,1)"));
                }
                if method != Method::Fista && !(self.epsilon > 0.0 && self.epsilon < rho) {
                    return bad(format!("adaptive Armijo needs 0 < epsilon < rho, got {} and {rho}", self.epsilon));
                }
            }
            let c = self.c_for(method);
            if !in_unit_interval(c) {
                return bad(format!("c = {c} is outside (0,1)"));
            }
            let p = self.precision_for(method);
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("precision must be positive, got {p}"));
            }
        }
        if let Some(m) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("m must be positive, got {m}"));
            }
        }
        match &self.alpha0_values {
            Some(v) if v.is_empty() => return bad("`alpha0_values` is empty".into()),
            Some(v) if v.iter().any(|a| !(*a > 0.0 && a.is_finite())) => {
                return bad("`alpha0_values` must be positive".into())
            }
            None if self.alpha0_multipliers.is_empty() => return bad("`alpha0_multipliers` is empty".into()),
            None if self.alpha0_multipliers.iter().any(|a| !(*a > 0.0 && a.is_finite())) => {
                return bad("`alpha0_multipliers` must be positive".into())
            }
            _ => {}
        }
        if self.max_adjustments == 0 {
            return bad("`max_adjustments` must be at least 1".into());
        }
        if let Some(s) = self.baseline_step {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("baseline_step must be positive, got {s}"));
            }
        }
        if self.is_synthetic() {
            if self.n == 0 || self.d == 0 {
                return bad("`n` and `d` must be at least 1".into());
            }
            if self.problem == ProblemKind::Lasso && self.sparsity > self.d {
                return bad(format!("sparsity {} exceeds d = {}", self.sparsity, self.d));
            }
        } else {
            let known = match self.problem {
                ProblemKind::Logistic => lookup(&self.dataset).is_some(),
                ProblemKind::MatrixFactorization => self.dataset.eq_ignore_ascii_case("movielens"),
                _ => false,
            };
            if !known {
                return bad(format!("dataset `{}` is not available for {}", self.dataset, self.problem));
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return bad(format!("gamma must be nonnegative, got {g}"));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise must be nonnegative, got {}", self.noise));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density must lie in (0,1], got {}", self.density));
        }
        if self.reference_budget_factor == 0 {
            return bad("`reference_budget_factor` must be at least 1".into());
        }
        Ok(())
    }
}
