use ndarray::{Array1, ArrayView1};

use super::{BacktrackConfig, Criterion, CriterionKind, CriterionProbe, LineSearchError};

/// Output of one proximal trial: `p_alpha(y)` and `f(p_alpha(y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxTrial {
    pub point: Array1<f64>,
    pub smooth_value: f64,
}

/// Data for the quadratic upper-bound test used by proximal gradient methods.
pub struct DescentLemmaContext<'a, P> {
    pub anchor_point: ArrayView1<'a, f64>,
    /// `f(y)`.
    pub smooth_value_at_anchor: f64,
    /// `grad f(y)`.
    pub gradient_at_anchor: ArrayView1<'a, f64>,
    /// `alpha -> (p_alpha(y), f(p_alpha(y)))`.
    pub prox_evaluator: P,
}

impl<'a, P: FnMut(f64) -> ProxTrial> DescentLemmaContext<'a, P> {
    pub fn new(
        anchor_point: ArrayView1<'a, f64>,
        smooth_value_at_anchor: f64,
        gradient_at_anchor: ArrayView1<'a, f64>,
        prox_evaluator: P,
    ) -> Result<Self, LineSearchError> {
        if anchor_point.len() != gradient_at_anchor.len() {
            return Err(LineSearchError::InvalidConfig(format!(
                "anchor has dimension {} but gradient has {}",
                anchor_point.len(),
                gradient_at_anchor.len()
            )));
        }
        Ok(Self {
            anchor_point,
            smooth_value_at_anchor,
            gradient_at_anchor,
            prox_evaluator,
        })
    }
}

fn evaluate<P: FnMut(f64) -> ProxTrial>(
    ctx: &mut DescentLemmaContext<'_, P>,
    alpha: f64,
) -> (CriterionProbe, ProxTrial) {
    let trial = (ctx.prox_evaluator)(alpha);
    if !trial.smooth_value.is_finite() {
        return (CriterionProbe::non_finite(alpha, trial.smooth_value), trial);
    }
    let step = &trial.point - &ctx.anchor_point;
    let model_gap = step.dot(&step) / (2.0 * alpha);
    let curvature =
        trial.smooth_value - ctx.smooth_value_at_anchor - ctx.gradient_at_anchor.dot(&step);
    let violation = if curvature.is_nan() || model_gap.is_nan() {
        f64::NEG_INFINITY
    } else if curvature <= 0.0 {
        // the linear model already upper-bounds f along this step
        f64::INFINITY
    } else {
        model_gap / curvature
    };
    (CriterionProbe::new(alpha, violation, trial.smooth_value), trial)
}

/// Evaluates the descent-lemma violation at `alpha` (one prox and one smooth
/// objective evaluation).
pub fn descent_lemma_violation<P: FnMut(f64) -> ProxTrial>(
    ctx: &mut DescentLemmaContext<'_, P>,
    alpha: f64,
) -> CriterionProbe {
    evaluate(ctx, alpha).0
}

/// `rho * v`, defined for `0 < v < 1`.
pub fn descent_lemma_adaptive_factor(violation: f64, rho: f64) -> Result<f64, LineSearchError> {
    if !(violation > 0.0 && violation.is_finite()) {
        return Err(LineSearchError::InvalidViolation(violation));
    }
    Ok(rho * violation)
}

/// Descent-lemma criterion usable by [`super::backtrack`]; keeps the most
/// recent proximal point so the caller can take the accepted one.
pub struct DescentLemmaCriterion<'a, P> {
    ctx: DescentLemmaContext<'a, P>,
    last: Option<ProxTrial>,
}

impl<'a, P: FnMut(f64) -> ProxTrial> DescentLemmaCriterion<'a, P> {
    pub fn new(ctx: DescentLemmaContext<'a, P>) -> Self {
        Self { ctx, last: None }
    }

    /// The proximal trial of the latest probe.
    pub fn last_trial(&self) -> Option<&ProxTrial> {
        self.last.as_ref()
    }

    pub fn into_last_trial(self) -> Option<ProxTrial> {
        self.last
    }
}

impl<P: FnMut(f64) -> ProxTrial> Criterion for DescentLemmaCriterion<'_, P> {
    fn kind(&self) -> CriterionKind {
        CriterionKind::DescentLemma
    }

    fn probe(&mut self, alpha: f64) -> CriterionProbe {
        let (probe, trial) = evaluate(&mut self.ctx, alpha);
        self.last = Some(trial);
        probe
    }

    fn adaptive_factor(&self, probe: &CriterionProbe, config: &BacktrackConfig) -> f64 {
        descent_lemma_adaptive_factor(probe.violation, config.rho).unwrap_or(config.rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linesearch::backtrack;
    use approx::assert_relative_eq;
    use ndarray::array;

    // f = L/2 |x|^2, psi = 0, so p_alpha(y) = (1 - alpha L) y.
    fn quadratic_trial(l: f64, y: Array1<f64>) -> impl FnMut(f64) -> ProxTrial {
        move |alpha| {
            let point = &y * (1.0 - alpha * l);
            let smooth_value = 0.5 * l * point.dot(&point);
            ProxTrial { point, smooth_value }
        }
    }

    #[test]
    fn quadratic_closed_form() {
        let l = 2.0;
        let y = array![1.0, -0.5, 3.0];
        let g = &y * l;
        let fy = 0.5 * l * y.dot(&y);
        let mut ctx =
            DescentLemmaContext::new(y.view(), fy, g.view(), quadratic_trial(l, y.clone())).unwrap();
        let p = descent_lemma_violation(&mut ctx, 1.0);
        assert_relative_eq!(p.violation, 0.5, epsilon = 1e-12);
        assert!(!p.feasible);
        let p = descent_lemma_violation(&mut ctx, 1.0 / l);
        // p = 0 exactly here, the ratio is still 1 / (L alpha) = 1
        assert_relative_eq!(p.violation, 1.0, epsilon = 1e-12);
        assert!(p.feasible);
    }

    #[test]
    fn nonpositive_curvature_is_feasible() {
        let y = array![1.0];
        let g = array![0.0];
        // f(p) below its linearization at y: concave along the segment
        let mut ctx = DescentLemmaContext::new(y.view(), 1.0, g.view(), |a: f64| ProxTrial {
            point: array![1.0 - a],
            smooth_value: 0.5,
        })
        .unwrap();
        let p = descent_lemma_violation(&mut ctx, 0.5);
        assert_eq!(p.violation, f64::INFINITY);
        assert!(p.feasible);
    }

    #[test]
    fn non_finite_trial_falls_back_to_rho() {
        let y = array![1.0];
        let g = array![1.0];
        let ctx = DescentLemmaContext::new(y.view(), 1.0, g.view(), |a: f64| ProxTrial {
            point: array![1.0 - a],
            smooth_value: if a > 0.5 { f64::NAN } else { 0.5 * (1.0 - a) * (1.0 - a) },
        })
        .unwrap();
        let mut crit = DescentLemmaCriterion::new(ctx);
        let probe = crit.probe(1.0);
        assert_eq!(probe.violation, f64::NEG_INFINITY);
        let cfg = BacktrackConfig::adaptive(0.9, 1.0);
        assert_eq!(crit.adaptive_factor(&probe, &cfg), 0.9);
    }

    #[test]
    fn adaptive_factor_values() {
        assert_relative_eq!(descent_lemma_adaptive_factor(0.5, 0.9).unwrap(), 0.45);
        assert_relative_eq!(
            descent_lemma_adaptive_factor(1.0 - 1e-12, 0.9).unwrap(),
            0.9,
            epsilon = 1e-11
        );
        assert!(descent_lemma_adaptive_factor(0.0, 0.9).is_err());
        assert!(descent_lemma_adaptive_factor(f64::NEG_INFINITY, 0.9).is_err());
    }

    #[test]
    fn adaptive_step_lands_on_rho_over_l() {
        // v = 1/(L alpha), so alpha * rho * v = rho / L
        let l = 4.0;
        let rho = 0.9;
        let y = array![0.3, 0.7];
        let g = &y * l;
        let fy = 0.5 * l * y.dot(&y);
        let ctx =
            DescentLemmaContext::new(y.view(), fy, g.view(), quadratic_trial(l, y.clone())).unwrap();
        let mut crit = DescentLemmaCriterion::new(ctx);
        let res = backtrack(&mut crit, &BacktrackConfig::adaptive(rho, 10.0)).unwrap();
        assert_eq!(res.criterion_evals, 2);
        assert_relative_eq!(res.accepted_alpha, rho / l, epsilon = 1e-12);
        let trial = crit.into_last_trial().unwrap();
        assert_relative_eq!(trial.smooth_value, res.accepted_probe.trial_value);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let y = array![1.0, 2.0];
        let g = array![1.0];
        assert!(DescentLemmaContext::new(y.view(), 0.0, g.view(), |_| ProxTrial {
            point: array![0.0],
            smooth_value: 0.0
        })
        .is_err());
    }
}
