//! The iteration driver and its per-iteration trace.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::steps::{adagrad_step, agd_step, fista_step, gd_step, FistaIndexing, OptimizerState};
use super::{Method, OptimizerError, Oracle, StepSource};
use crate::linesearch::{InitPolicy, LineSearchError};
use crate::problems::Problem;

/// When to stop a run. The run always stops after `max_iterations`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopping {
    pub max_iterations: usize,
    /// `F*` used to report the suboptimality gap `F(x_k) - F*`.
    pub reference_optimum: Option<f64>,
    /// Stop once the gap is at most this (requires `reference_optimum`).
    pub gap_tolerance: Option<f64>,
    /// Stop once `|grad f|` is at most this (smooth problems only).
    pub gradient_tolerance: Option<f64>,
}

impl Stopping {
    pub fn iterations(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            reference_optimum: None,
            gap_tolerance: None,
            gradient_tolerance: None,
        }
    }

    pub fn with_reference(mut self, optimum: f64) -> Self {
        self.reference_optimum = Some(optimum);
        self
    }

    pub fn with_gap_tolerance(mut self, tol: f64) -> Self {
        self.gap_tolerance = Some(tol);
        self
    }

    pub fn with_gradient_tolerance(mut self, tol: f64) -> Self {
        self.gradient_tolerance = Some(tol);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub stopping: Stopping,
    /// AGD's `m`; falls back to the problem's strong convexity hint.
    pub strong_convexity: Option<f64>,
    pub fista_indexing: FistaIndexing,
    /// Overrides the problem's initial point.
    pub initial_point: Option<Array1<f64>>,
}

impl RunOptions {
    pub fn new(stopping: Stopping) -> Self {
        Self {
            stopping,
            strong_convexity: None,
            fista_indexing: FistaIndexing::default(),
            initial_point: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Suboptimality gap reached its tolerance.
    Converged,
    GradientTolerance,
    /// Exact zero gradient or a proximal step that no longer moves.
    Stationary,
    MaxIterations,
    /// A line search exhausted its adjustment cap; the trace is partial.
    LineSearchCap,
    /// The objective or gradient became non-finite.
    NonFinite,
}

impl Termination {
    const NAMES: [(Termination, &'static str); 6] = [
        (Termination::Converged, "converged"),
        (Termination::GradientTolerance, "gradient-tolerance"),
        (Termination::Stationary, "stationary"),
        (Termination::MaxIterations, "max-iterations"),
        (Termination::LineSearchCap, "line-search-cap"),
        (Termination::NonFinite, "non-finite"),
    ];

    /// Whether the run ended in a usable state.
    pub fn is_success(self) -> bool {
        !matches!(self, Termination::LineSearchCap | Termination::NonFinite)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = Self::NAMES.iter().find(|(t, _)| t == self).map(|(_, n)| *n).unwrap_or("?");
        f.write_str(name)
    }
}

impl FromStr for Termination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(t, _)| *t)
            .ok_or_else(|| format!("unknown termination `{s}`"))
    }
}

/// One trace row: the state after `iter` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub gap: Option<f64>,
    /// Step accepted in this iteration; absent on the initial row.
    pub alpha: Option<f64>,
    pub f_evals: usize,
    pub grad_evals: usize,
    pub crit_evals: usize,
    pub prox_evals: usize,
    pub elapsed_s: f64,
}

/// Ordered `key=value` description of the settings that produced a trace.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fingerprint {
    entries: Vec<(String, String)>,
}

impl Fingerprint {
    /// Sets `key`, replacing an existing value in place.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: Method,
    pub fingerprint: Fingerprint,
    /// Initial row followed by one row per iteration.
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
    pub final_point: Array1<f64>,
    /// Criterion evaluations of every line-search call, in order.
    pub per_call_criterion_evals: Vec<usize>,
    /// AGD iterations whose Lipschitz estimate was raised to `m`.
    pub lipschitz_clamps: usize,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// First row whose gap is at most `target`.
    pub fn first_within(&self, target: f64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.gap.is_some_and(|g| g <= target))
    }
}

fn fingerprint_for(method: Method, step: &StepSource, options: &RunOptions, m: Option<f64>) -> Fingerprint {
    let mut fp = Fingerprint::default();
    fp.set("method", method);
    match step {
        StepSource::Fixed(alpha) => {
            fp.set("criterion", "none");
            fp.set("mode", "fixed");
            fp.set("rho", "");
            fp.set("c", "");
            fp.set("epsilon", "");
            fp.set("alpha0", format!("{alpha:?}"));
            fp.set("policy", "");
        }
        StepSource::LineSearch(cfg) => {
            let policy = if method == Method::Fista { InitPolicy::Monotone } else { cfg.policy };
            fp.set("criterion", method.criterion());
            fp.set("mode", cfg.mode);
            fp.set("rho", format!("{:?}", cfg.rho));
            fp.set("c", format!("{:?}", cfg.c));
            fp.set("epsilon", format!("{:?}", cfg.epsilon));
            fp.set("alpha0", format!("{:?}", cfg.alpha0));
            fp.set("policy", policy);
        }
    }
    if let Some(m) = m {
        fp.set("m", format!("{m:?}"));
    }
    if method == Method::Fista {
        let indexing = match options.fista_indexing {
            FistaIndexing::Classical => "classical",
            FistaIndexing::Lagged => "lagged",
        };
        fp.set("fista_indexing", indexing);
    }
    fp
}

fn l2_norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Runs `method` from the initial point and records one row per iteration.
pub fn run(
    problem: &dyn Problem,
    method: Method,
    step: &StepSource,
    options: &RunOptions,
) -> Result<RunTrace, OptimizerError> {
    run_with_sink(problem, method, step, options, &mut |_| {})
}

/// [`run`] that also hands every row to `sink` as soon as it is produced.
///
/// Exactly one gradient is evaluated per iteration. A run stopped by the
/// gradient tolerance or a zero gradient has spent one more gradient on the
/// check that ended it. Objective evaluations are those the step rule needs:
/// none for fixed steps, the initial value plus one per probe for line
/// searches, and for AGD and FISTA one more per iteration whenever the
/// extrapolated base point differs from the last evaluated one.
pub fn run_with_sink(
    problem: &dyn Problem,
    method: Method,
    step: &StepSource,
    options: &RunOptions,
    sink: &mut dyn FnMut(&TraceRow),
) -> Result<RunTrace, OptimizerError> {
    step.validate(method.criterion())?;
    let x0 = match &options.initial_point {
        Some(x) => x.clone(),
        None => problem.initial_point(),
    };
    if x0.len() != problem.dimension() {
        return Err(OptimizerError::DimensionMismatch {
            got: x0.len(),
            want: problem.dimension(),
        });
    }
    let composite = problem.nonsmooth().is_some();
    if let Some(psi) = problem.nonsmooth() {
        if method != Method::Fista {
            return Err(OptimizerError::NoProxAvailable);
        }
        if psi.prox(x0.view(), 1.0).is_none() {
            return Err(OptimizerError::NoProxAvailable);
        }
    }
    let m = if method == Method::Agd {
        let m = options
            .strong_convexity
            .or(problem.strong_convexity_hint())
            .ok_or(OptimizerError::MissingStrongConvexity)?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(OptimizerError::InvalidStrongConvexity { m, lipschitz: f64::NAN });
        }
        Some(m)
    } else {
        None
    };

    let stopping = options.stopping;
    let oracle = Oracle::new(problem);
    let clock = Instant::now();
    let mut last_elapsed = 0.0_f64;
    let mut elapsed = |oracle: &Oracle<'_>| {
        let e = clock.elapsed().saturating_sub(oracle.peek_time()).as_secs_f64();
        last_elapsed = last_elapsed.max(e);
        last_elapsed
    };
    let gap_of = |objective: f64| stopping.reference_optimum.map(|f| objective - f);
    let converged = |gap: Option<f64>| matches!((gap, stopping.gap_tolerance), (Some(g), Some(t)) if g <= t);

    let mut state = OptimizerState::new(x0);
    let searching = matches!(step, StepSource::LineSearch(_));
    let initial_objective = if !searching {
        oracle.peek_value(state.x.view())
    } else if method == Method::Fista {
        let f = oracle.smooth_value(state.y.view());
        state.smooth_at_y = Some(f);
        f + oracle.nonsmooth_value(state.y.view())
    } else {
        let v = oracle.value(state.x.view());
        state.value_at_x = Some(v);
        v
    };

    let mut rows = Vec::with_capacity(stopping.max_iterations.min(1 << 16) + 1);
    let mut push = |rows: &mut Vec<TraceRow>, iter: usize, objective: f64, alpha: Option<f64>, oracle: &Oracle<'_>| {
        let c = oracle.counters();
        let row = TraceRow {
            iter,
            objective,
            gap: gap_of(objective),
            alpha,
            f_evals: c.objective_evals,
            grad_evals: c.gradient_evals,
            crit_evals: c.criterion_evals,
            prox_evals: c.prox_evals,
            elapsed_s: elapsed(oracle),
        };
        sink(&row);
        rows.push(row);
        row
    };

    let first = push(&mut rows, 0, initial_objective, None, &oracle);
    let mut per_call = Vec::new();
    let mut clamps = 0usize;
    let mut termination = if !initial_objective.is_finite() {
        Some(Termination::NonFinite)
    } else if converged(first.gap) {
        Some(Termination::Converged)
    } else {
        None
    };

    let mut k = 0;
    while termination.is_none() && k < stopping.max_iterations {
        let at = if method == Method::Fista { &state.y } else { &state.x };
        let gradient = oracle.gradient(at.view());
        if !gradient.iter().all(|g| g.is_finite()) {
            termination = Some(Termination::NonFinite);
            break;
        }
        if !composite {
            if gradient.iter().all(|g| *g == 0.0) {
                termination = Some(Termination::Stationary);
                break;
            }
            if stopping.gradient_tolerance.is_some_and(|tol| l2_norm(gradient.view()) <= tol) {
                termination = Some(Termination::GradientTolerance);
                break;
            }
        }

        let outcome = match method {
            Method::Gd => gd_step(&mut state, &oracle, gradient.view(), step),
            Method::Agd => agd_step(&mut state, &oracle, gradient.view(), step, m.expect("checked above")),
            Method::Adagrad => adagrad_step(&mut state, &oracle, gradient.view(), step),
            Method::Fista => fista_step(&mut state, &oracle, gradient.view(), step, options.fista_indexing),
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(OptimizerError::LineSearch(LineSearchError::CapExceeded(r))) => {
                per_call.push(r.criterion_evals);
                termination = Some(Termination::LineSearchCap);
                break;
            }
            Err(e) => return Err(e),
        };
        k += 1;
        if let Some(r) = &outcome.search {
            per_call.push(r.criterion_evals);
        }
        clamps += usize::from(outcome.lipschitz_clamped);

        let reported = if method == Method::Agd { &state.y } else { &state.x };
        let objective = match outcome.objective {
            Some(v) => v,
            None => oracle.peek_value(reported.view()),
        };
        let row = push(&mut rows, k, objective, Some(outcome.alpha), &oracle);
        if !objective.is_finite() {
            termination = Some(Termination::NonFinite);
        } else if converged(row.gap) {
            termination = Some(Termination::Converged);
        } else if method == Method::Fista && state.x == state.x_prev && state.y == state.x {
            termination = Some(Termination::Stationary);
        }
    }

    let final_point = if method == Method::Agd { state.y } else { state.x };
    Ok(RunTrace {
        method,
        fingerprint: fingerprint_for(method, step, options, m),
        rows,
        termination: termination.unwrap_or(Termination::MaxIterations),
        final_point,
        per_call_criterion_evals: per_call,
        lipschitz_clamps: clamps,
    })
}
