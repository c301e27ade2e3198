//! GD, AGD, Adagrad and FISTA driven by a fixed step or a backtracking line
//! search.

mod oracle;
mod run;
mod steps;

pub use oracle::{EvalCounters, Oracle};
pub use run::{
    run, run_with_sink, Fingerprint, RunOptions, RunTrace, Stopping, Termination, TraceRow,
};
pub use steps::{
    adagrad_step, agd_momentum, agd_step, fista_momentum, fista_step, gd_step, next_momentum_scalar,
    prox_point, FistaIndexing, OptimizerState, StepOutcome,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::linesearch::{BacktrackConfig, CriterionKind, LineSearchError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error(transparent)]
    LineSearch(#[from] LineSearchError),
    #[error("strong convexity constant m = {m} is invalid for Lipschitz estimate {lipschitz}")]
    InvalidStrongConvexity { m: f64, lipschitz: f64 },
    #[error("AGD needs a strong convexity constant but none was supplied")]
    MissingStrongConvexity,
    #[error("the objective has no registered proximal map")]
    NoProxAvailable,
    #[error("fixed step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("initial point has length {got}, problem dimension is {want}")]
    DimensionMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gd,
    Agd,
    Adagrad,
    Fista,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gd, Method::Agd, Method::Adagrad, Method::Fista];

    /// Criterion used by this method's line search.
    pub fn criterion(self) -> CriterionKind {
        match self {
            Method::Fista => CriterionKind::DescentLemma,
            _ => CriterionKind::Armijo,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gd => "gd",
            Method::Agd => "agd",
            Method::Adagrad => "adagrad",
            Method::Fista => "fista",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Where the step size of each iteration comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSource {
    Fixed(f64),
    LineSearch(BacktrackConfig),
}

impl StepSource {
    pub(crate) fn validate(&self, kind: CriterionKind) -> Result<(), OptimizerError> {
        match self {
            StepSource::Fixed(alpha) if !(*alpha > 0.0 && alpha.is_finite()) => {
                Err(OptimizerError::InvalidStep(*alpha))
            }
            StepSource::Fixed(_) => Ok(()),
            StepSource::LineSearch(cfg) => Ok(cfg.validate(kind)?),
        }
    }
}
