use ndarray::{Array1, ArrayView1};
use std::cell::Cell;
use std::time::{Duration, Instant};

use super::OptimizerError;
use crate::problems::Problem;

/// Running tallies of the work done by one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub objective_evals: usize,
    pub gradient_evals: usize,
    pub criterion_evals: usize,
    pub prox_evals: usize,
}

/// Counting wrapper around a problem.
///
/// Every evaluation an algorithm needs goes through a counted method.
/// Monitoring values for the trace use [`Oracle::peek_value`], which is
/// neither counted nor included in the run's elapsed time.
pub struct Oracle<'p> {
    problem: &'p dyn Problem,
    counters: Cell<EvalCounters>,
    peek_time: Cell<Duration>,
}

impl<'p> Oracle<'p> {
    pub fn new(problem: &'p dyn Problem) -> Self {
        Self {
            problem,
            counters: Cell::new(EvalCounters::default()),
            peek_time: Cell::new(Duration::ZERO),
        }
    }

    pub fn problem(&self) -> &'p dyn Problem {
        self.problem
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters.get()
    }

    fn bump(&self, f: impl FnOnce(&mut EvalCounters)) {
        let mut c = self.counters.get();
        f(&mut c);
        self.counters.set(c);
    }

    /// Full objective `F`.
    pub fn value(&self, x: ArrayView1<f64>) -> f64 {
        self.bump(|c| c.objective_evals += 1);
        self.problem.value(x)
    }

    /// Smooth part `f`.
    pub fn smooth_value(&self, x: ArrayView1<f64>) -> f64 {
        self.bump(|c| c.objective_evals += 1);
        self.problem.smooth_value(x)
    }

    pub fn gradient(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.bump(|c| c.gradient_evals += 1);
        self.problem.gradient(x)
    }

    /// Proximal map of the nonsmooth term; the identity when there is none.
    pub fn prox(&self, z: ArrayView1<f64>, step: f64) -> Result<Array1<f64>, OptimizerError> {
        match self.problem.nonsmooth() {
            None => Ok(z.to_owned()),
            Some(psi) => {
                self.bump(|c| c.prox_evals += 1);
                psi.prox(z, step).ok_or(OptimizerError::NoProxAvailable)
            }
        }
    }

    /// Nonsmooth term `psi`, zero when absent. Not counted: it is a cheap
    /// closed form evaluated alongside a counted smooth value.
    pub fn nonsmooth_value(&self, x: ArrayView1<f64>) -> f64 {
        self.problem.nonsmooth().map_or(0.0, |psi| psi.value(x))
    }

    pub(crate) fn add_criterion_evals(&self, n: usize) {
        self.bump(|c| c.criterion_evals += n);
    }

    /// Uncounted, untimed objective evaluation for monitoring.
    pub fn peek_value(&self, x: ArrayView1<f64>) -> f64 {
        let start = Instant::now();
        let v = self.problem.value(x);
        self.peek_time.set(self.peek_time.get() + start.elapsed());
        v
    }

    /// Total time spent in [`Oracle::peek_value`].
    pub fn peek_time(&self) -> Duration {
        self.peek_time.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{lasso_objective, Square};
    use ndarray::array;

    #[test]
    fn counts_only_counted_calls() {
        let p = Square;
        let o = Oracle::new(&p);
        let x = array![2.0];
        assert_eq!(o.value(x.view()), 4.0);
        assert_eq!(o.peek_value(x.view()), 4.0);
        o.gradient(x.view());
        o.add_criterion_evals(3);
        assert_eq!(
            o.counters(),
            EvalCounters {
                objective_evals: 1,
                gradient_evals: 1,
                criterion_evals: 3,
                prox_evals: 0
            }
        );
        // no nonsmooth term: prox is the identity and is not counted
        assert_eq!(o.prox(x.view(), 1.0).unwrap(), x);
        assert_eq!(o.counters().prox_evals, 0);
    }

    #[test]
    fn prox_is_counted_for_composite_problems() {
        let p = lasso_objective(array![[1.0]], array![1.0], 0.5).unwrap();
        let o = Oracle::new(&p);
        assert_eq!(o.prox(array![2.0].view(), 1.0).unwrap(), array![1.5]);
        assert_eq!(o.counters().prox_evals, 1);
    }
}
