//! Backtracking line search driven by a violation ratio.
//!
//! A criterion maps a tentative step size `alpha` to a [`CriterionProbe`]
//! whose `violation` is at least one exactly when the criterion holds. The
//! [`backtrack`] loop shrinks `alpha` until that happens, either by a constant
//! factor `rho` ([`Mode::Regular`]) or by a factor computed from the observed
//! violation ([`Mode::Adaptive`]).

mod armijo;
mod descent_lemma;

pub use armijo::{armijo_adaptive_factor, armijo_violation, ArmijoContext, ArmijoCriterion};
pub use descent_lemma::{
    descent_lemma_adaptive_factor, descent_lemma_violation, DescentLemmaContext,
    DescentLemmaCriterion, ProxTrial,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Default clamp floor of the adaptive Armijo factor.
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Default cap on the number of step adjustments in one call.
pub const DEFAULT_MAX_ADJUSTMENTS: usize = 200;
/// Default Armijo sufficient-decrease constant.
pub const DEFAULT_ARMIJO_C: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineSearchError {
    #[error("direction is not a descent direction: <grad, d> = {0}")]
    NonDescentDirection(f64),
    #[error("violation {0} is not usable by the adaptive factor")]
    InvalidViolation(f64),
    #[error("no feasible step after {} adjustments (last alpha = {})", .0.adjustments, .0.accepted_alpha)]
    CapExceeded(Box<LineSearchResult>),
    #[error("invalid line-search configuration: {0}")]
    InvalidConfig(String),
}

/// Which line-search inequality is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    Armijo,
    DescentLemma,
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionKind::Armijo => f.write_str("armijo"),
            CriterionKind::DescentLemma => f.write_str("descent-lemma"),
        }
    }
}

/// Constant (`Regular`) or violation-driven (`Adaptive`) backtracking factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Regular,
    Adaptive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Regular => f.write_str("regular"),
            Mode::Adaptive => f.write_str("adaptive"),
        }
    }
}

/// How the first tentative step of each call is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPolicy {
    /// Start every call from `alpha0`.
    Restarting,
    /// Start from the previously accepted step.
    Monotone,
}

impl fmt::Display for InitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitPolicy::Restarting => f.write_str("restarting"),
            InitPolicy::Monotone => f.write_str("monotone"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktrackConfig {
    pub rho: f64,
    /// Armijo constant; ignored by the descent-lemma criterion.
    pub c: f64,
    /// Floor of the adaptive Armijo factor.
    pub epsilon: f64,
    pub alpha0: f64,
    pub policy: InitPolicy,
    pub max_adjustments: usize,
    pub mode: Mode,
}

impl BacktrackConfig {
    pub fn new(mode: Mode, rho: f64, alpha0: f64) -> Self {
        Self {
            rho,
            c: DEFAULT_ARMIJO_C,
            epsilon: DEFAULT_EPSILON,
            alpha0,
            policy: InitPolicy::Restarting,
            max_adjustments: DEFAULT_MAX_ADJUSTMENTS,
            mode,
        }
    }

    pub fn regular(rho: f64, alpha0: f64) -> Self {
        Self::new(Mode::Regular, rho, alpha0)
    }

    pub fn adaptive(rho: f64, alpha0: f64) -> Self {
        Self::new(Mode::Adaptive, rho, alpha0)
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_policy(mut self, policy: InitPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_max_adjustments(mut self, max_adjustments: usize) -> Self {
        self.max_adjustments = max_adjustments;
        self
    }

    /// Checks the parameter ranges required for `kind`.
    pub fn validate(&self, kind: CriterionKind) -> Result<(), LineSearchError> {
        let bad = |msg: String| Err(LineSearchError::InvalidConfig(msg));
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0,1), got {}", self.rho));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return bad(format!("alpha0 must be positive and finite, got {}", self.alpha0));
        }
        if self.max_adjustments == 0 {
            return bad("max_adjustments must be at least 1".into());
        }
        if kind == CriterionKind::Armijo {
            if !(self.c > 0.0 && self.c < 1.0) {
                return bad(format!("c must lie in (0,1), got {}", self.c));
            }
            if self.mode == Mode::Adaptive && !(self.epsilon > 0.0 && self.epsilon < self.rho) {
                return bad(format!(
                    "adaptive Armijo needs 0 < epsilon < rho, got epsilon = {} and rho = {}",
                    self.epsilon, self.rho
                ));
            }
        }
        Ok(())
    }
}

/// One evaluation of a criterion at a tentative step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionProbe {
    pub alpha: f64,
    /// `v(alpha)`; `-inf` when the trial objective was not finite.
    pub violation: f64,
    /// Objective at the trial point (`F` for Armijo, smooth part `f` for the
    /// descent lemma), so the accepted point needs no re-evaluation.
    pub trial_value: f64,
    pub feasible: bool,
}

impl CriterionProbe {
    pub(crate) fn new(alpha: f64, violation: f64, trial_value: f64) -> Self {
        Self {
            alpha,
            violation,
            trial_value,
            feasible: violation >= 1.0,
        }
    }

    pub(crate) fn non_finite(alpha: f64, trial_value: f64) -> Self {
        Self::new(alpha, f64::NEG_INFINITY, trial_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub accepted_alpha: f64,
    /// Criterion evaluations in this call, the accepting one included.
    pub criterion_evals: usize,
    pub adjustments: usize,
    pub accepted_probe: CriterionProbe,
    pub terminated_by_cap: bool,
}

/// A line-search criterion: probes a step size and knows its adaptive factor.
pub trait Criterion {
    fn kind(&self) -> CriterionKind;

    fn probe(&mut self, alpha: f64) -> CriterionProbe;

    /// Factor applied after an infeasible probe in adaptive mode.
    fn adaptive_factor(&self, probe: &CriterionProbe, config: &BacktrackConfig) -> f64;
}

/// Runs the backtracking loop from `config.alpha0`.
///
/// Probed step sizes are strictly decreasing. The returned result carries the
/// accepting probe; `CapExceeded` carries the last probe instead.
pub fn backtrack<C: Criterion + ?Sized>(
    criterion: &mut C,
    config: &BacktrackConfig,
) -> Result<LineSearchResult, LineSearchError> {
    backtrack_from(criterion, config, config.alpha0)
}

/// Same as [`backtrack`] with an explicit first tentative step.
pub fn backtrack_from<C: Criterion + ?Sized>(
    criterion: &mut C,
    config: &BacktrackConfig,
    start: f64,
) -> Result<LineSearchResult, LineSearchError> {
    config.validate(criterion.kind())?;
    if !(start > 0.0 && start.is_finite()) {
        return Err(LineSearchError::InvalidConfig(format!(
            "initial step must be positive and finite, got {start}"
        )));
    }

    let mut alpha = start;
    let mut evals = 0usize;
    loop {
        let probe = criterion.probe(alpha);
        evals += 1;
        if probe.feasible {
            return Ok(LineSearchResult {
                accepted_alpha: probe.alpha,
                criterion_evals: evals,
                adjustments: evals - 1,
                accepted_probe: probe,
                terminated_by_cap: false,
            });
        }

        let factor = match config.mode {
            Mode::Regular => config.rho,
            Mode::Adaptive => criterion.adaptive_factor(&probe, config),
        };
        let next = alpha * factor;
        if evals > config.max_adjustments || !(next > 0.0) || next >= alpha {
            return Err(LineSearchError::CapExceeded(Box::new(LineSearchResult {
                accepted_alpha: probe.alpha,
                criterion_evals: evals,
                adjustments: evals - 1,
                accepted_probe: probe,
                terminated_by_cap: true,
            })));
        }
        alpha = next;
    }
}

/// First tentative step of a call under `policy`.
pub fn initial_step(policy: InitPolicy, alpha0: f64, previous_accepted: Option<f64>) -> f64 {
    match (policy, previous_accepted) {
        (InitPolicy::Monotone, Some(prev)) => prev,
        _ => alpha0,
    }
}

/// Upper bound on the criterion evaluations accrued by `calls` monotone-policy
/// Armijo calls on an `L`-smooth function, where `alpha_bar` is the threshold
/// below which every step is feasible.
pub fn monotone_eval_ceiling(alpha_bar: f64, alpha0: f64, rho: f64, calls: usize) -> usize {
    let adjustments = ((alpha_bar / alpha0).ln() / rho.ln()).floor() + 1.0;
    calls + adjustments.max(0.0) as usize
}
