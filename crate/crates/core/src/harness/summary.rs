//! Per-variant aggregates of a grid and the adaptive-vs-regular gain.

use super::config::Metric;
use crate::optimizers::{Fingerprint, RunTrace, Termination, TraceRow};

/// What the summary needs from a trace, whether fresh or read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub fingerprint: Fingerprint,
    pub termination: Option<Termination>,
    pub rows: Vec<TraceRow>,
}

impl From<&RunTrace> for TraceRecord {
    fn from(t: &RunTrace) -> Self {
        Self {
            fingerprint: t.fingerprint.clone(),
            termination: Some(t.termination),
            rows: t.rows.clone(),
        }
    }
}

impl TraceRecord {
    /// Variant label, falling back to method, mode and rho.
    pub fn variant(&self) -> String {
        if let Some(v) = self.fingerprint.get("variant") {
            return v.to_string();
        }
        let fp = &self.fingerprint;
        let mut label = fp.get("method").unwrap_or("unknown").to_string();
        for key in ["mode", "rho"] {
            if let Some(v) = fp.get(key).filter(|v| !v.is_empty()) {
                label.push('-');
                label.push_str(v);
            }
        }
        label
    }

    /// Row at which counters are read: the first within `target`, else the
    /// last row. The flag tells whether the target was reached.
    pub fn row_at_precision(&self, target: f64) -> Option<(&TraceRow, bool)> {
        match self.rows.iter().find(|r| r.gap.is_some_and(|g| g <= target)) {
            Some(row) => Some((row, true)),
            None => self.rows.last().map(|r| (r, false)),
        }
    }

    fn precision(&self) -> Option<f64> {
        self.fingerprint.get("precision").and_then(|p| p.parse().ok())
    }
}

/// Aggregates of one variant over its initial steps.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub label: String,
    pub method: String,
    /// `regular`, `adaptive` or `fixed`.
    pub mode: String,
    pub rho: Option<f64>,
    pub runs: usize,
    /// Runs that ended non-finite or at the adjustment cap without reaching
    /// the target; excluded from the averages.
    pub diverged: usize,
    /// Whether every averaged run reached the target.
    pub reached_precision: bool,
    pub f_evals_avg: Option<f64>,
    pub grad_evals_avg: Option<f64>,
    pub elapsed_avg: Option<f64>,
    /// `1 - adaptive / best regular`; adaptive variants with a comparator only.
    pub gain: Option<f64>,
}

impl VariantSummary {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Fevals => self.f_evals_avg,
            Metric::Elapsed => self.elapsed_avg,
            Metric::Gradevals => self.grad_evals_avg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary {
    pub metric: Metric,
    pub variants: Vec<VariantSummary>,
}

impl ComparisonSummary {
    /// Gain of `method`'s adaptive variant, if it has one.
    pub fn gain_for(&self, method: &str) -> Option<f64> {
        self.variants
            .iter()
            .find(|v| v.method == method && v.mode == "adaptive")
            .and_then(|v| v.gain)
    }

    /// The first gain in the summary.
    pub fn gain(&self) -> Option<f64> {
        self.variants.iter().find_map(|v| v.gain)
    }

    pub fn variant(&self, label: &str) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.label == label)
    }

    /// Regular variant with the smallest metric, preferring variants that
    /// reached the target.
    pub fn best_regular(&self, method: &str) -> Option<&VariantSummary> {
        let candidates: Vec<(&VariantSummary, f64)> = self
            .variants
            .iter()
            .filter(|v| v.method == method && v.mode == "regular")
            .filter_map(|v| v.metric(self.metric).map(|m| (v, m)))
            .collect();
        let best = |reached_only: bool| {
            candidates
                .iter()
                .filter(|(v, _)| !reached_only || v.reached_precision)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(v, _)| *v)
        };
        best(true).or_else(|| best(false))
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Groups traces by variant (in first-seen order), reads counters at the
/// first row within the target and averages them. `precision` overrides the
/// per-trace `precision` fingerprint entry.
pub fn summarize(traces: &[TraceRecord], precision: Option<f64>, metric: Metric) -> ComparisonSummary {
    let mut order: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<&TraceRecord>> = Vec::new();
    for t in traces {
        let label = t.variant();
        match order.iter().position(|l| *l == label) {
            Some(i) => groups[i].push(t),
            None => {
                order.push(label);
                groups.push(vec![t]);
            }
        }
    }
    let variants: Vec<VariantSummary> = order
        .into_iter()
        .zip(groups)
        .map(|(label, group)| {
            let fp = &group[0].fingerprint;
            let (mut f, mut g, mut e) = (Vec::new(), Vec::new(), Vec::new());
            let mut diverged = 0;
            let mut all_reached = true;
            for t in &group {
                let target = precision.or_else(|| t.precision()).unwrap_or(f64::NEG_INFINITY);
                let Some((row, reached)) = t.row_at_precision(target) else {
                    diverged += 1;
                    continue;
                };
                let failed = t.termination.is_some_and(|term| !term.is_success());
                if failed && !reached {
                    diverged += 1;
                    continue;
                }
                all_reached &= reached;
                f.push(row.f_evals as f64);
                g.push(row.grad_evals as f64);
                e.push(row.elapsed_s);
            }
            VariantSummary {
                label,
                method: fp.get("method").unwrap_or("unknown").to_string(),
                mode: fp.get("mode").unwrap_or("").to_string(),
                rho: fp.get("rho").and_then(|r| r.parse().ok()),
                runs: group.len(),
                diverged,
                reached_precision: all_reached && !f.is_empty(),
                f_evals_avg: mean(&f),
                grad_evals_avg: mean(&g),
                elapsed_avg: mean(&e),
                gain: None,
            }
        })
        .collect();
    let mut summary = ComparisonSummary { metric, variants };
    let gains: Vec<Option<f64>> = summary
        .variants
        .iter()
        .map(|v| {
            if v.mode != "adaptive" {
                return None;
            }
            let best = summary.best_regular(&v.method).and_then(|b| b.metric(metric))?;
            let own = v.metric(metric)?;
            (best > 0.0).then(|| 1.0 - own / best)
        })
        .collect();
    for (v, gain) in summary.variants.iter_mut().zip(gains) {
        v.gain = gain;
    }
    summary
}
