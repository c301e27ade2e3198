//! Single iterations of each method.
//!
//! Each step mutates an [`OptimizerState`] and evaluates the objective only
//! through an [`Oracle`], so its cost is visible in the oracle's counters.

use ndarray::{Array1, ArrayView1, Zip};
use serde::{Deserialize, Serialize};
use std::cell::Cell;

use super::{OptimizerError, Oracle, StepSource};
use crate::linesearch::{
    backtrack_from, initial_step, ArmijoContext, ArmijoCriterion, BacktrackConfig,
    DescentLemmaContext, DescentLemmaCriterion, InitPolicy, LineSearchError, LineSearchResult,
    ProxTrial,
};
use crate::problems::Nonsmooth;

/// Which iterates FISTA extrapolates from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FistaIndexing {
    /// `y_{k+1} = x_{k+1} + (t_k - 1)/t_{k+1} (x_{k+1} - x_k)`.
    #[default]
    Classical,
    /// `y_{k+1} = x_k + (t_k - 1)/t_{k+1} (x_k - x_{k-1})`, one index behind.
    Lagged,
}

/// Iterates and auxiliary sequences shared by all methods. Each method uses
/// the fields it needs and leaves the others untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    /// `x_k`; for AGD the extrapolated point where the gradient is taken.
    pub x: Array1<f64>,
    /// AGD's `y_k` or FISTA's extrapolated point.
    pub y: Array1<f64>,
    /// `x_{k-1}` (FISTA).
    pub x_prev: Array1<f64>,
    /// FISTA momentum scalar, starts at 1.
    pub t: f64,
    /// Adagrad accumulator of squared gradients.
    pub s: Array1<f64>,
    /// `1 / alpha_k` of the latest step.
    pub lipschitz_estimate: Option<f64>,
    /// Accepted step of the latest line search, used by the monotone policy.
    pub last_alpha: Option<f64>,
    /// `F(x)` when already known (Armijo-based methods).
    pub value_at_x: Option<f64>,
    /// `f(y)` when already known (FISTA).
    pub smooth_at_y: Option<f64>,
}

impl OptimizerState {
    pub fn new(x0: Array1<f64>) -> Self {
        let n = x0.len();
        Self {
            y: x0.clone(),
            x_prev: x0.clone(),
            x: x0,
            t: 1.0,
            s: Array1::zeros(n),
            lipschitz_estimate: None,
            last_alpha: None,
            value_at_x: None,
            smooth_at_y: None,
        }
    }
}

/// What one step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Step size used (the nominal one when the step was skipped).
    pub alpha: f64,
    /// Line-search result, absent for fixed steps and skipped searches.
    pub search: Option<LineSearchResult>,
    /// Objective at the method's reported iterate when it is known for free.
    pub objective: Option<f64>,
    /// AGD only: `1/alpha` fell below `m` and was raised to `m`.
    pub lipschitz_clamped: bool,
}

fn nominal_alpha(step: &StepSource, last_alpha: Option<f64>) -> f64 {
    match step {
        StepSource::Fixed(a) => *a,
        StepSource::LineSearch(cfg) => initial_step(cfg.policy, cfg.alpha0, last_alpha),
    }
}

fn is_zero(v: ArrayView1<f64>) -> bool {
    v.iter().all(|e| *e == 0.0)
}

/// `x + alpha d`, computed the same way for probes and accepted points so the
/// cached trial value belongs to the exact accepted vector.
fn along(x: ArrayView1<f64>, alpha: f64, d: ArrayView1<f64>) -> Array1<f64> {
    let mut out = x.to_owned();
    out.scaled_add(alpha, &d);
    out
}

/// Armijo backtracking from `x` along `d`; criterion evaluations are added to
/// the oracle's counters even when the search hits its cap.
fn armijo_search(
    oracle: &Oracle<'_>,
    x: ArrayView1<f64>,
    base_value: f64,
    d: ArrayView1<f64>,
    slope: f64,
    config: &BacktrackConfig,
    last_alpha: Option<f64>,
) -> Result<LineSearchResult, OptimizerError> {
    let start = initial_step(config.policy, config.alpha0, last_alpha);
    let ctx = ArmijoContext::new(base_value, slope, |a| oracle.value(along(x, a, d).view()));
    let mut criterion = ArmijoCriterion::new(ctx, config.c)?;
    let result = backtrack_from(&mut criterion, config, start);
    match &result {
        Ok(r) => oracle.add_criterion_evals(r.criterion_evals),
        Err(LineSearchError::CapExceeded(r)) => oracle.add_criterion_evals(r.criterion_evals),
        Err(_) => {}
    }
    Ok(result?)
}

/// Shared by GD and Adagrad: move along `d` with a fixed or searched step.
fn directional_step(
    state: &mut OptimizerState,
    oracle: &Oracle<'_>,
    gradient: ArrayView1<f64>,
    d: Array1<f64>,
    step: &StepSource,
) -> Result<StepOutcome, OptimizerError> {
    if is_zero(d.view()) {
        return Ok(StepOutcome {
            alpha: nominal_alpha(step, state.last_alpha),
            search: None,
            objective: state.value_at_x,
            lipschitz_clamped: false,
        });
    }
    let (alpha, search, value) = match step {
        StepSource::Fixed(a) => (*a, None, None),
        StepSource::LineSearch(cfg) => {
            let base = match state.value_at_x {
                Some(v) => v,
                None => oracle.value(state.x.view()),
            };
            let slope = gradient.dot(&d);
            let r = armijo_search(oracle, state.x.view(), base, d.view(), slope, cfg, state.last_alpha)?;
            state.last_alpha = Some(r.accepted_alpha);
            (r.accepted_alpha, Some(r), Some(r.accepted_probe.trial_value))
        }
    };
    state.x = along(state.x.view(), alpha, d.view());
    state.value_at_x = value;
    state.lipschitz_estimate = Some(1.0 / alpha);
    Ok(StepOutcome {
        alpha,
        search,
        objective: value,
        lipschitz_clamped: false,
    })
}

/// `x_{k+1} = x_k - alpha_k grad F(x_k)`.
pub fn gd_step(
    state: &mut OptimizerState,
    oracle: &Oracle<'_>,
    gradient: ArrayView1<f64>,
    step: &StepSource,
) -> Result<StepOutcome, OptimizerError> {
    directional_step(state, oracle, gradient, -&gradient, step)
}

/// `beta = (sqrt L - sqrt m) / (sqrt L + sqrt m)`, requiring `0 < m <= L`.
pub fn agd_momentum(lipschitz: f64, m: f64) -> Result<f64, OptimizerError> {
    if !(m > 0.0 && m.is_finite() && lipschitz >= m && lipschitz.is_finite()) {
        return Err(OptimizerError::InvalidStrongConvexity { m, lipschitz });
    }
    let (sl, sm) = (lipschitz.sqrt(), m.sqrt());
    Ok((sl - sm) / (sl + sm))
}

/// One accelerated step: `y_{k+1} = x_k - alpha_k grad F(x_k)` and
/// `x_{k+1} = (1 + beta) y_{k+1} - beta y_k` with `L = 1/alpha_k`.
///
/// When `1/alpha_k < m` the estimate is raised to `m` (so `beta = 0`) and the
/// outcome is flagged. The reported iterate is `y_{k+1}`.
pub fn agd_step(
    state: &mut OptimizerState,
    oracle: &Oracle<'_>,
    gradient: ArrayView1<f64>,
    step: &StepSource,
    m: f64,
) -> Result<StepOutcome, OptimizerError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(OptimizerError::InvalidStrongConvexity {
            m,
            lipschitz: state.lipschitz_estimate.unwrap_or(f64::NAN),
        });
    }
    let d = -&gradient;
    let (alpha, search, y_value) = if is_zero(d.view()) {
        (nominal_alpha(step, state.last_alpha), None, state.value_at_x)
    } else {
        match step {
            StepSource::Fixed(a) => (*a, None, None),
            StepSource::LineSearch(cfg) => {
                let base = match state.value_at_x {
                    Some(v) => v,
                    None => oracle.value(state.x.view()),
                };
                let slope = gradient.dot(&d);
                let r = armijo_search(oracle, state.x.view(), base, d.view(), slope, cfg, state.last_alpha)?;
                state.last_alpha = Some(r.accepted_alpha);
                (r.accepted_alpha, Some(r), Some(r.accepted_probe.trial_value))
            }
        }
    };
    let y_next = along(state.x.view(), alpha, d.view());

    let raw = 1.0 / alpha;
    let clamped = raw < m;
    let lipschitz = raw.max(m);
    let beta = agd_momentum(lipschitz, m)?;
    let x_next = if beta == 0.0 {
        y_next.clone()
    } else {
        let mut x = &y_next * (1.0 + beta);
        x.scaled_add(-beta, &state.y);
        x
    };

    state.value_at_x = if x_next == y_next { y_value } else { None };
    state.x = x_next;
    state.y = y_next;
    state.lipschitz_estimate = Some(lipschitz);
    Ok(StepOutcome {
        alpha,
        search,
        objective: y_value,
        lipschitz_clamped: clamped,
    })
}

/// Accumulates squared gradients and steps along `-g_i / sqrt(s_i)`;
/// coordinates with `s_i = 0` stay put.
pub fn adagrad_step(
    state: &mut OptimizerState,
    oracle: &Oracle<'_>,
    gradient: ArrayView1<f64>,
    step: &StepSource,
) -> Result<StepOutcome, OptimizerError> {
    Zip::from(&mut state.s).and(&gradient).for_each(|s, g| *s += g * g);
    let d = Zip::from(&gradient)
        .and(&state.s)
        .map_collect(|g, s| if *s > 0.0 { -g / s.sqrt() } else { 0.0 });
    directional_step(state, oracle, gradient, d, step)
}

/// `argmin_u psi(u) + |u - (y - alpha g)|^2 / (2 alpha)`; the plain gradient
/// step when there is no nonsmooth term.
pub fn prox_point(
    y: ArrayView1<f64>,
    alpha: f64,
    smooth_gradient: ArrayView1<f64>,
    nonsmooth: Option<&dyn Nonsmooth>,
) -> Result<Array1<f64>, OptimizerError> {
    let z = along(y, -alpha, smooth_gradient);
    match nonsmooth {
        None => Ok(z),
        Some(psi) => psi.prox(z.view(), alpha).ok_or(OptimizerError::NoProxAvailable),
    }
}

/// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.
pub fn next_momentum_scalar(t: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
}

/// `(t_k - 1) / t_{k+1}`.
pub fn fista_momentum(t: f64) -> f64 {
    (t - 1.0) / next_momentum_scalar(t)
}

/// One proximal gradient step from `y_k` followed by the momentum update.
///
/// A line search always starts from the previously accepted step (monotone
/// policy), whatever the configured policy, so the Lipschitz estimate
/// `1/alpha` never decreases.
pub fn fista_step(
    state: &mut OptimizerState,
    oracle: &Oracle<'_>,
    gradient: ArrayView1<f64>,
    step: &StepSource,
    indexing: FistaIndexing,
) -> Result<StepOutcome, OptimizerError> {
    let (alpha, search, point, smooth) = match step {
        StepSource::Fixed(a) => {
            let z = along(state.y.view(), -a, gradient);
            (*a, None, oracle.prox(z.view(), *a)?, None)
        }
        StepSource::LineSearch(cfg) => {
            let cfg = BacktrackConfig {
                policy: InitPolicy::Monotone,
                ..*cfg
            };
            let f_y = match state.smooth_at_y {
                Some(v) => v,
                None => oracle.smooth_value(state.y.view()),
            };
            let start = initial_step(cfg.policy, cfg.alpha0, state.last_alpha);
            let prox_failed = Cell::new(false);
            let y = state.y.view();
            let evaluator = |a: f64| {
                let z = along(y, -a, gradient);
                match oracle.prox(z.view(), a) {
                    Ok(p) => {
                        let smooth_value = oracle.smooth_value(p.view());
                        ProxTrial { point: p, smooth_value }
                    }
                    Err(_) => {
                        prox_failed.set(true);
                        ProxTrial { point: z, smooth_value: f64::NAN }
                    }
                }
            };
            let ctx = DescentLemmaContext::new(y, f_y, gradient, evaluator)?;
            let mut criterion = DescentLemmaCriterion::new(ctx);
            let result = backtrack_from(&mut criterion, &cfg, start);
            if prox_failed.get() {
                return Err(OptimizerError::NoProxAvailable);
            }
            match &result {
                Ok(r) => oracle.add_criterion_evals(r.criterion_evals),
                Err(LineSearchError::CapExceeded(r)) => oracle.add_criterion_evals(r.criterion_evals),
                Err(_) => {}
            }
            let r = result?;
            let trial = criterion.into_last_trial().expect("an accepted probe has a trial");
            state.last_alpha = Some(r.accepted_alpha);
            (r.accepted_alpha, Some(r), trial.point, Some(trial.smooth_value))
        }
    };

    let t_next = next_momentum_scalar(state.t);
    let coeff = (state.t - 1.0) / t_next;
    let y_next = match indexing {
        FistaIndexing::Classical => {
            let mut y = point.clone();
            if coeff != 0.0 {
                y.scaled_add(coeff, &(&point - &state.x));
            }
            y
        }
        FistaIndexing::Lagged => {
            let mut y = state.x.clone();
            if coeff != 0.0 {
                y.scaled_add(coeff, &(&state.x - &state.x_prev));
            }
            y
        }
    };

    let objective = smooth.map(|f| f + oracle.nonsmooth_value(point.view()));
    state.smooth_at_y = if y_next == point { smooth } else { None };
    state.x_prev = std::mem::replace(&mut state.x, point);
    state.y = y_next;
    state.t = t_next;
    state.lipschitz_estimate = Some(1.0 / alpha);
    Ok(StepOutcome {
        alpha,
        search,
        objective,
        lipschitz_clamped: false,
    })
}
