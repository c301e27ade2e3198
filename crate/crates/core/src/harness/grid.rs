//! Expands a configuration into grid cells and runs them.

use rayon::prelude::*;
use std::path::Path;

use super::config::ExperimentConfig;
use super::instance::{build_instance, Instance};
use super::HarnessError;
use crate::linesearch::{BacktrackConfig, Mode};
use crate::optimizers::{run, Method, RunOptions, RunTrace, StepSource, Stopping};

/// One run of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub method: Method,
    /// Shared by all cells that differ only in `alpha0`.
    pub variant: String,
    pub step: StepSource,
    /// Position of `alpha0` in the initial step grid.
    pub alpha_index: usize,
}

impl GridCell {
    /// Output file name, unique within one grid.
    pub fn file_name(&self, index: usize) -> String {
        format!("{index:03}_{}_a{}.csv", self.variant, self.alpha_index)
    }
}

/// Variant label such as `gd-adaptive-rho0.3` or `gd-fixed`.
pub fn variant_label(method: Method, mode: Option<Mode>, rho: f64) -> String {
    match mode {
        None => format!("{method}-fixed"),
        Some(mode) => format!("{method}-{mode}-rho{}", short_float(rho)),
    }
}

/// At most six decimals with trailing zeros trimmed.
fn short_float(x: f64) -> String {
    let s = format!("{:.6}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// The cells of `cfg` in run order: per method the baseline, then regular
/// factors, then the adaptive factor, each across the initial step grid.
pub fn expand_grid(cfg: &ExperimentConfig, instance: &Instance) -> Result<Vec<GridCell>, HarnessError> {
    let alphas = instance.alpha0_grid(cfg)?;
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        if cfg.baseline {
            let alpha = cfg.baseline_step.or(instance.baseline_step).ok_or_else(|| {
                HarnessError::Config(format!("no default baseline step for {}; set `baseline_step`", cfg.problem))
            })?;
            cells.push(GridCell {
                method,
                variant: variant_label(method, None, 0.0),
                step: StepSource::Fixed(alpha),
                alpha_index: 0,
            });
        }
        let mut modes = Vec::new();
        if cfg.regular {
            modes.extend(cfg.rho_regular_for(method).into_iter().map(|r| (Mode::Regular, r)));
        }
        if cfg.adaptive {
            modes.push((Mode::Adaptive, cfg.rho_adaptive_for(method)));
        }
        for (mode, rho) in modes {
            for (k, &alpha0) in alphas.iter().enumerate() {
                let ls = BacktrackConfig::new(mode, rho, alpha0)
                    .with_c(cfg.c_for(method))
                    .with_epsilon(cfg.epsilon)
                    .with_policy(cfg.policy)
                    .with_max_adjustments(cfg.max_adjustments);
                ls.validate(method.criterion()).map_err(|e| HarnessError::Config(e.to_string()))?;
                cells.push(GridCell {
                    method,
                    variant: variant_label(method, Some(mode), rho),
                    step: StepSource::LineSearch(ls),
                    alpha_index: k,
                });
            }
        }
    }
    Ok(cells)
}

/// Result of a grid: traces in cell order.
#[derive(Debug, Clone)]
pub struct GridOutput {
    pub cells: Vec<GridCell>,
    pub traces: Vec<RunTrace>,
    pub reference_optimum: f64,
}

/// Builds the instance, computes `F*` and runs every cell, using up to
/// `cfg.workers` threads. Configuration problems surface before any run.
pub fn run_grid(cfg: &ExperimentConfig, data_dir: Option<&Path>) -> Result<GridOutput, HarnessError> {
    cfg.validate()?;
    let instance = build_instance(cfg, data_dir)?;
    let cells = expand_grid(cfg, &instance)?;
    let reference = instance.reference(cfg)?;
    let run_cell = |cell: &GridCell| run_cell(cfg, &instance, cell, reference);
    let traces: Result<Vec<_>, _> = if cfg.workers == 1 {
        cells.iter().map(run_cell).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    };
    Ok(GridOutput {
        cells,
        traces: traces?,
        reference_optimum: reference,
    })
}

fn run_cell(cfg: &ExperimentConfig, instance: &Instance, cell: &GridCell, reference: f64) -> Result<RunTrace, HarnessError> {
    let precision = cfg.precision_for(cell.method);
    let mut stopping = Stopping::iterations(cfg.max_iterations).with_reference(reference);
    if cfg.stop_at_precision {
        stopping = stopping.with_gap_tolerance(precision);
    }
    let mut options = RunOptions::new(stopping);
    options.fista_indexing = cfg.fista_indexing;
    if cell.method == Method::Agd {
        options.strong_convexity = instance.strong_convexity;
    }
    let mut trace = run(instance.problem.as_ref(), cell.method, &cell.step, &options)?;
    let fp = &mut trace.fingerprint;
    fp.set("seed", cfg.seed);
    fp.set("problem", cfg.problem);
    fp.set("dataset", &cfg.dataset);
    fp.set("n", cfg.n);
    fp.set("d", cfg.d);
    fp.set("variant", &cell.variant);
    fp.set("alpha_index", cell.alpha_index);
    fp.set("precision", format!("{precision:?}"));
    fp.set("reference_optimum", format!("{reference:?}"));
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ProblemKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: 40,
            d: 4,
            max_iterations: 50,
            reference_budget_factor: 50,
            ..Default::default()
        }
    }

    #[test]
    fn singleton_grid() {
        let cfg = ExperimentConfig {
            rho_regular: Some(vec![0.5]),
            adaptive: false,
            alpha0_values: Some(vec![1.0]),
            ..small()
        };
        let out = run_grid(&cfg, None).unwrap();
        assert_eq!(out.traces.len(), 1);
        assert_eq!(out.traces[0].fingerprint.get("variant"), Some("gd-regular-rho0.5"));
    }

    #[test]
    fn fista_grid_has_four_variants_per_alpha() {
        let cfg = ExperimentConfig {
            problem: ProblemKind::Lasso,
            methods: vec![Method::Fista],
            n: 20,
            d: 30,
            sparsity: 3,
            ..small()
        };
        let inst = build_instance(&cfg, None).unwrap();
        let cells = expand_grid(&cfg, &inst).unwrap();
        assert_eq!(cells.len(), 16);
        let mut labels: Vec<_> = cells.iter().map(|c| c.variant.as_str()).collect();
        labels.dedup();
        assert_eq!(
            labels,
            ["fista-regular-rho0.5", "fista-regular-rho0.333333", "fista-regular-rho0.2", "fista-adaptive-rho0.909091"]
        );
    }

    #[test]
    fn baseline_uses_inverse_smoothness() {
        let cfg = ExperimentConfig {
            baseline: true,
            regular: false,
            adaptive: false,
            ..small()
        };
        let inst = build_instance(&cfg, None).unwrap();
        let cells = expand_grid(&cfg, &inst).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].step, StepSource::Fixed(inst.baseline_step.unwrap()));
        assert_eq!(cells[0].variant, "gd-fixed");
    }

    #[test]
    fn rosenbrock_baseline_needs_step() {
        let cfg = ExperimentConfig {
            problem: ProblemKind::Rosenbrock,
            baseline: true,
            ..small()
        };
        assert!(matches!(run_grid(&cfg, None), Err(HarnessError::Config(_))));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let base = ExperimentConfig {
            methods: vec![Method::Gd, Method::Adagrad],
            ..small()
        };
        let serial = run_grid(&ExperimentConfig { workers: 1, ..base.clone() }, None).unwrap();
        let pooled = run_grid(&ExperimentConfig { workers: 3, ..base }, None).unwrap();
        assert_eq!(serial.traces.len(), pooled.traces.len());
        for (a, b) in serial.traces.iter().zip(&pooled.traces) {
            assert_eq!(a.fingerprint, b.fingerprint);
            assert_eq!(a.final_point, b.final_point);
            assert_eq!(a.rows.len(), b.rows.len());
        }
    }
}
