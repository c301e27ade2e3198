use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use abls::harness::{
    audit_problem, read_summary, read_trace_dir, replicate_examples, run_grid, summarize, unreached, write_grid,
    write_summary, ComparisonSummary, ExperimentConfig, HarnessError, Metric, ProblemKind, TraceRecord,
    GRADIENT_TOLERANCE, SUMMARY_FILE,
};

#[derive(Parser)]
#[command(name = "abls", version, about = "Backtracking line-search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the grid described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "fevals")]
        metric: Metric,
        /// Directory holding the LIBSVM files; falls back to $ABLS_DATA_DIR.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Overrides the configured worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Exit with status 3 when a variant misses its precision target.
        #[arg(long)]
        strict: bool,
    },
    /// Summarize the traces in a directory.
    Compare {
        dir: PathBuf,
        /// Overrides the per-trace precision target.
        #[arg(long)]
        precision: Option<f64>,
        #[arg(long, default_value = "fevals")]
        metric: Metric,
        /// Also write the summary table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Compare analytic gradients with finite differences.
    Gradcheck {
        #[arg(long)]
        problem: ProblemKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Check the two worked backtracking examples.
    ReplicateExamples,
}

fn opt(x: Option<f64>, precision: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.precision$}"))
}

fn print_summary(summary: &ComparisonSummary, mut out: impl Write) -> io::Result<()> {
    writeln!(
        out,
        "{:<32} {:>9} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8}",
        "variant", "mode", "f_evals", "grad_evals", "elapsed_s", "reached", "gain", "diverged"
    )?;
    for v in &summary.variants {
        writeln!(
            out,
            "{:<32} {:>9} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8}",
            v.label,
            v.mode,
            opt(v.f_evals_avg, 1),
            opt(v.grad_evals_avg, 1),
            opt(v.elapsed_avg, 6),
            if v.reached_precision { "yes" } else { "no*" },
            opt(v.gain, 3),
            v.diverged
        )?;
    }
    writeln!(out, "gain metric: {}", summary.metric)
}

fn strict_check(summary: &ComparisonSummary, strict: bool) -> Result<(), HarnessError> {
    let missed = unreached(summary);
    if strict && !missed.is_empty() {
        return Err(HarnessError::PrecisionNotReached(missed));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let stdout = io::stdout();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            metric,
            data_dir,
            workers,
            strict,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(workers) = workers {
                cfg.workers = workers;
            }
            let output = run_grid(&cfg, data_dir.as_deref())?;
            let records: Vec<TraceRecord> = output.traces.iter().map(TraceRecord::from).collect();
            let summary = summarize(&records, None, metric);
            let files = write_grid(&cfg, &output, &summary, &out)?;
            print_summary(&summary, stdout.lock())?;
            println!("F* = {:e}; {} traces written to {}", output.reference_optimum, files.traces.len(), out.display());
            strict_check(&summary, strict)
        }
        Command::Compare {
            dir,
            precision,
            metric,
            out,
            strict,
        } => {
            let traces = read_trace_dir(&dir)?;
            let summary = if traces.is_empty() {
                let path = dir.join(SUMMARY_FILE);
                read_summary(BufReader::new(File::open(&path)?), metric)?
            } else {
                summarize(&traces, precision, metric)
            };
            if let Some(path) = out {
                write_summary(&summary, File::create(path)?)?;
            }
            print_summary(&summary, stdout.lock())?;
            strict_check(&summary, strict)
        }
        Command::Gradcheck { problem, seed, points } => {
            let report = audit_problem(problem, points, seed)?;
            println!(
                "{}: {} points, max relative error {:.3e} (tolerance {:e}) {}",
                report.problem,
                report.points,
                report.max_relative_error,
                GRADIENT_TOLERANCE,
                if report.passed() { "PASS" } else { "FAIL" }
            );
            if report.passed() {
                Ok(())
            } else {
                Err(HarnessError::Format(format!("{} gradient disagrees with finite differences", report.problem)))
            }
        }
        Command::ReplicateExamples => {
            let checks = replicate_examples()?;
            let mut failed = Vec::new();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {:<26} expected {:<24} observed {}", c.name, c.expected, c.observed);
                if !c.passed {
                    failed.push(c.name);
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Format(format!("example checks failed: {}", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
