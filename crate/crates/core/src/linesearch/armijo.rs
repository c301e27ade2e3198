use super::{BacktrackConfig, Criterion, CriterionKind, CriterionProbe, LineSearchError};

/// Data for the sufficient-decrease test `F(x + a d) - F(x) <= c a <grad F(x), d>`.
pub struct ArmijoContext<E> {
    /// `F(x_k)`.
    pub base_value: f64,
    /// `<grad F(x_k), d_k>`, negative for a descent direction.
    pub directional_derivative: f64,
    /// `alpha -> F(x_k + alpha d_k)`.
    pub trial_evaluator: E,
}

impl<E: FnMut(f64) -> f64> ArmijoContext<E> {
    pub fn new(base_value: f64, directional_derivative: f64, trial_evaluator: E) -> Self {
        Self {
            base_value,
            directional_derivative,
            trial_evaluator,
        }
    }
}

/// Evaluates the Armijo violation ratio at `alpha` (one objective evaluation).
pub fn armijo_violation<E: FnMut(f64) -> f64>(
    ctx: &mut ArmijoContext<E>,
    alpha: f64,
    c: f64,
) -> Result<CriterionProbe, LineSearchError> {
    // NaN slopes fail this test too
    if !(ctx.directional_derivative < 0.0) {
        return Err(LineSearchError::NonDescentDirection(ctx.directional_derivative));
    }
    let trial = (ctx.trial_evaluator)(alpha);
    if !trial.is_finite() {
        return Ok(CriterionProbe::non_finite(alpha, trial));
    }
    let v = (trial - ctx.base_value) / (c * alpha * ctx.directional_derivative);
    if v.is_nan() {
        return Ok(CriterionProbe::non_finite(alpha, trial));
    }
    Ok(CriterionProbe::new(alpha, v, trial))
}

/// `max(epsilon, rho (1 - c) / (1 - c v))`; non-finite violations yield `epsilon`.
pub fn armijo_adaptive_factor(violation: f64, rho: f64, c: f64, epsilon: f64) -> f64 {
    if !violation.is_finite() {
        return epsilon;
    }
    epsilon.max(rho * (1.0 - c) / (1.0 - c * violation))
}

/// Armijo criterion usable by [`super::backtrack`].
pub struct ArmijoCriterion<E> {
    ctx: ArmijoContext<E>,
    c: f64,
}

impl<E: FnMut(f64) -> f64> ArmijoCriterion<E> {
    pub fn new(ctx: ArmijoContext<E>, c: f64) -> Result<Self, LineSearchError> {
        if !(ctx.directional_derivative < 0.0) {
            return Err(LineSearchError::NonDescentDirection(ctx.directional_derivative));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(LineSearchError::InvalidConfig(format!("c must lie in (0,1), got {c}")));
        }
        Ok(Self { ctx, c })
    }

    pub fn context(&self) -> &ArmijoContext<E> {
        &self.ctx
    }
}

impl<E: FnMut(f64) -> f64> Criterion for ArmijoCriterion<E> {
    fn kind(&self) -> CriterionKind {
        CriterionKind::Armijo
    }

    fn probe(&mut self, alpha: f64) -> CriterionProbe {
        armijo_violation(&mut self.ctx, alpha, self.c)
            .expect("descent direction checked at construction")
    }

    fn adaptive_factor(&self, probe: &CriterionProbe, config: &BacktrackConfig) -> f64 {
        armijo_adaptive_factor(probe.violation, config.rho, self.c, config.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linesearch::{backtrack, BacktrackConfig};
    use approx::assert_relative_eq;

    // F(x) = x^2 at x = -1 along d = 2, slope <F'(x), d> = -4.
    fn example_one() -> ArmijoContext<impl FnMut(f64) -> f64> {
        ArmijoContext::new(1.0, -4.0, |a: f64| (-1.0 + 2.0 * a).powi(2))
    }

    #[test]
    fn example_one_violations() {
        let mut ctx = example_one();
        let p = armijo_violation(&mut ctx, 1.0, 0.25).unwrap();
        assert_eq!(p.violation, 0.0);
        assert!(!p.feasible);
        let p = armijo_violation(&mut ctx, 0.75, 0.25).unwrap();
        assert_relative_eq!(p.violation, 1.0, epsilon = 1e-15);
        assert!(p.feasible);
        assert_relative_eq!(p.trial_value, 0.25);
    }

    #[test]
    fn half_square_hand_value() {
        // F = x^2/2, x = 1, d = -1, c = 1/2, alpha = 1/2: (1/8 - 1/2) / (-1/4) = 1.5
        let mut ctx = ArmijoContext::new(0.5, -1.0, |a: f64| 0.5 * (1.0 - a).powi(2));
        let p = armijo_violation(&mut ctx, 0.5, 0.5).unwrap();
        assert_relative_eq!(p.violation, 1.5, epsilon = 1e-15);
        assert!(p.feasible);
    }

    #[test]
    fn zero_progress_is_zero_violation() {
        let mut ctx = ArmijoContext::new(3.0, -1.0, |_| 3.0);
        assert_eq!(armijo_violation(&mut ctx, 0.3, 0.1).unwrap().violation, 0.0);
    }

    #[test]
    fn one_evaluation_per_probe() {
        let mut calls = 0;
        let mut ctx = ArmijoContext::new(1.0, -4.0, |a: f64| {
            calls += 1;
            (-1.0 + 2.0 * a).powi(2)
        });
        armijo_violation(&mut ctx, 1.0, 0.25).unwrap();
        armijo_violation(&mut ctx, 0.5, 0.25).unwrap();
        drop(ctx);
        assert_eq!(calls, 2);
    }

    #[test]
    fn rejects_ascent_direction() {
        let mut ctx = ArmijoContext::new(1.0, 0.0, |_| 0.0);
        assert!(matches!(
            armijo_violation(&mut ctx, 1.0, 0.5),
            Err(LineSearchError::NonDescentDirection(_))
        ));
        let ctx = ArmijoContext::new(1.0, 2.0, |_| 0.0);
        assert!(ArmijoCriterion::new(ctx, 0.5).is_err());
    }

    #[test]
    fn non_finite_trial_is_infeasible() {
        let mut ctx = ArmijoContext::new(1.0, -1.0, |_| f64::INFINITY);
        let p = armijo_violation(&mut ctx, 1.0, 0.5).unwrap();
        assert_eq!(p.violation, f64::NEG_INFINITY);
        assert!(!p.feasible);
        assert_eq!(armijo_adaptive_factor(p.violation, 0.3, 0.5, 0.01), 0.01);
    }

    #[test]
    fn adaptive_factor_values() {
        assert_relative_eq!(armijo_adaptive_factor(1.0, 0.3, 0.25, 0.01), 0.3, epsilon = 1e-15);
        assert_relative_eq!(armijo_adaptive_factor(0.0, 0.3, 0.25, 0.01), 0.225, epsilon = 1e-15);
        // 0.3 * 0.5 / 50.5 ≈ 0.00297 falls below the clamp
        assert_eq!(armijo_adaptive_factor(-99.0, 0.3, 0.5, 0.01), 0.01);
    }

    #[test]
    fn example_one_backtracking() {
        let mut crit = ArmijoCriterion::new(example_one(), 0.25).unwrap();
        let res = backtrack(&mut crit, &BacktrackConfig::regular(0.75, 1.0)).unwrap();
        assert_eq!(res.accepted_alpha, 0.75);
        assert_eq!(res.criterion_evals, 2);

        let mut crit = ArmijoCriterion::new(example_one(), 0.25).unwrap();
        let res = backtrack(&mut crit, &BacktrackConfig::regular(0.8, 1.0)).unwrap();
        assert_relative_eq!(res.accepted_alpha, 0.64, epsilon = 1e-12);
        assert_eq!(res.criterion_evals, 3);

        // adaptive: factor 0.8 * 0.75 / 1 = 0.6, then v(0.6) = 0.96 / 0.6 = 1.6
        let mut crit = ArmijoCriterion::new(example_one(), 0.25).unwrap();
        let res = backtrack(&mut crit, &BacktrackConfig::adaptive(0.8, 1.0)).unwrap();
        assert_relative_eq!(res.accepted_alpha, 0.6, epsilon = 1e-12);
        assert_relative_eq!(res.accepted_probe.violation, 1.6, epsilon = 1e-12);
        assert_eq!(res.criterion_evals, 2);
    }
}
