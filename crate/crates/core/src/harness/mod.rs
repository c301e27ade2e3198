//! Experiment grids over methods, line-search modes, factors and initial
//! steps, with CSV traces and summary tables.

mod audit;
mod config;
mod csvio;
mod grid;
mod instance;
mod summary;

pub use audit::{
    audit_instance, audit_problem, finite_difference_gradient, gradient_audit, random_points, relative_error,
    replicate_examples, AuditReport, ExampleCheck, GRADIENT_TOLERANCE,
};
pub use config::{ExperimentConfig, Metric, ProblemKind, DEFAULT_PRECISION};
pub use csvio::{read_summary, read_trace, write_summary, write_trace, SUMMARY_HEADER, TRACE_HEADER};
pub use grid::{expand_grid, run_grid, variant_label, GridCell, GridOutput};
pub use instance::{build_instance, reference_optimum, Instance, MOVIELENS_FILE, REFERENCE_TOLERANCE};
pub use summary::{summarize, ComparisonSummary, TraceRecord, VariantSummary};

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::datasets::DatasetError;
use crate::linesearch::LineSearchError;
use crate::optimizers::OptimizerError;
use crate::problems::ProblemError;

/// Name of the summary table inside an output directory.
pub const SUMMARY_FILE: &str = "summary.csv";
/// Name of the resolved configuration inside an output directory.
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("precision not reached by: {}", .0.join(", "))]
    PrecisionNotReached(Vec<String>),
}

impl From<LineSearchError> for HarnessError {
    fn from(e: LineSearchError) -> Self {
        HarnessError::Optimizer(e.into())
    }
}

impl HarnessError {
    /// 1 for configuration problems, 2 for runtime failures and 3 for a
    /// missed precision target.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Dataset(
                DatasetError::UnknownDataset(_) | DatasetError::MissingDataDir | DatasetError::InvalidParameter(_),
            ) => 1,
            HarnessError::Problem(ProblemError::RankOutOfRange { .. } | ProblemError::InvalidParameter(_)) => 1,
            HarnessError::Optimizer(
                OptimizerError::LineSearch(LineSearchError::InvalidConfig(_))
                | OptimizerError::InvalidStrongConvexity { .. }
                | OptimizerError::MissingStrongConvexity
                | OptimizerError::NoProxAvailable
                | OptimizerError::InvalidStep(_)
                | OptimizerError::DimensionMismatch { .. },
            ) => 1,
            HarnessError::PrecisionNotReached(_) => 3,
            _ => 2,
        }
    }
}

/// Files produced by [`write_grid`].
#[derive(Debug, Clone)]
pub struct GridFiles {
    pub traces: Vec<PathBuf>,
    pub summary: PathBuf,
}

/// Writes one trace file per cell, the resolved configuration and the
/// summary table into `out_dir`.
pub fn write_grid(
    cfg: &ExperimentConfig,
    output: &GridOutput,
    summary: &ComparisonSummary,
    out_dir: &Path,
) -> Result<GridFiles, HarnessError> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(CONFIG_FILE), cfg.to_json())?;
    let mut traces = Vec::with_capacity(output.traces.len());
    for (i, (cell, trace)) in output.cells.iter().zip(&output.traces).enumerate() {
        let path = out_dir.join(cell.file_name(i));
        write_trace(&TraceRecord::from(trace), BufWriter::new(File::create(&path)?))?;
        traces.push(path);
    }
    let summary_path = out_dir.join(SUMMARY_FILE);
    write_summary(summary, BufWriter::new(File::create(&summary_path)?))?;
    Ok(GridFiles {
        traces,
        summary: summary_path,
    })
}

/// Reads every trace file in `dir` (the summary excluded), in name order.
pub fn read_trace_dir(dir: &Path) -> Result<Vec<TraceRecord>, HarnessError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv") && p.file_name().is_some_and(|n| n != SUMMARY_FILE))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| read_trace(File::open(p)?)).collect()
}

/// Labels of variants that missed their target.
pub fn unreached(summary: &ComparisonSummary) -> Vec<String> {
    summary
        .variants
        .iter()
        .filter(|v| !v.reached_precision)
        .map(|v| v.label.clone())
        .collect()
}
