//! CSV encoding of traces and summaries.
//!
//! Trace files start with `# key=value` lines holding the fingerprint and the
//! termination reason, followed by a header and one line per row. Floats are
//! written with 17 significant digits so that parsing restores them exactly;
//! absent values are empty fields.

use std::io::{BufRead, BufReader, Read, Write};

use super::config::Metric;
use super::summary::{ComparisonSummary, TraceRecord, VariantSummary};
use super::HarnessError;
use crate::optimizers::{Fingerprint, Termination, TraceRow};

pub const TRACE_HEADER: [&str; 9] = [
    "iter",
    "objective",
    "gap",
    "alpha",
    "f_evals",
    "grad_evals",
    "crit_evals",
    "prox_evals",
    "elapsed_s",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "variant",
    "rho",
    "mode",
    "f_evals_avg",
    "grad_evals_avg",
    "elapsed_avg",
    "reached_precision",
    "gain",
    "diverged",
];

const TERMINATION_KEY: &str = "termination";

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn format_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Format(msg.into())
}

pub fn write_trace<W: Write>(trace: &TraceRecord, mut sink: W) -> Result<(), HarnessError> {
    for (k, v) in trace.fingerprint.iter() {
        writeln!(sink, "# {k}={v}")?;
    }
    if let Some(t) = trace.termination {
        writeln!(sink, "# {TERMINATION_KEY}={t}")?;
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.rows {
        w.write_record([
            r.iter.to_string(),
            float(r.objective),
            opt_float(r.gap),
            opt_float(r.alpha),
            r.f_evals.to_string(),
            r.grad_evals.to_string(),
            r.crit_evals.to_string(),
            r.prox_evals.to_string(),
            float(r.elapsed_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, HarnessError> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| format_err(format!("line {line}: bad `{}` value `{raw}`", TRACE_HEADER[i])))
}

fn parse_opt(rec: &csv::StringRecord, i: usize, line: u64) -> Result<Option<f64>, HarnessError> {
    if rec.get(i).unwrap_or("").is_empty() {
        Ok(None)
    } else {
        parse_field(rec, i, line).map(Some)
    }
}

pub fn read_trace<R: Read>(source: R) -> Result<TraceRecord, HarnessError> {
    let mut text = String::new();
    BufReader::new(source).read_to_string(&mut text)?;
    let mut fingerprint = Fingerprint::default();
    let mut termination = None;
    for line in text.lines() {
        let Some(comment) = line.strip_prefix('#') else {
            continue;
        };
        let comment = comment.strip_prefix(' ').unwrap_or(comment);
        let Some((k, v)) = comment.split_once('=') else {
            continue;
        };
        if k == TERMINATION_KEY {
            termination = Some(v.parse::<Termination>().map_err(format_err)?);
        } else {
            fingerprint.set(k, v);
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(format_err(format!("unexpected trace header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(TraceRow {
            iter: parse_field(&rec, 0, line)?,
            objective: parse_field(&rec, 1, line)?,
            gap: parse_opt(&rec, 2, line)?,
            alpha: parse_opt(&rec, 3, line)?,
            f_evals: parse_field(&rec, 4, line)?,
            grad_evals: parse_field(&rec, 5, line)?,
            crit_evals: parse_field(&rec, 6, line)?,
            prox_evals: parse_field(&rec, 7, line)?,
            elapsed_s: parse_field(&rec, 8, line)?,
        });
    }
    Ok(TraceRecord {
        fingerprint,
        termination,
        rows,
    })
}

pub fn write_summary<W: Write>(summary: &ComparisonSummary, sink: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SUMMARY_HEADER)?;
    for v in &summary.variants {
        w.write_record([
            v.label.clone(),
            opt_float(v.rho),
            v.mode.clone(),
            opt_float(v.f_evals_avg),
            opt_float(v.grad_evals_avg),
            opt_float(v.elapsed_avg),
            v.reached_precision.to_string(),
            opt_float(v.gain),
            v.diverged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a summary file back. The method is the label's first `-` segment
/// and the run count is not stored, so it is left at zero.
pub fn read_summary<R: BufRead>(source: R, metric: Metric) -> Result<ComparisonSummary, HarnessError> {
    let mut reader = csv::Reader::from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(format_err("unexpected summary header"));
    }
    let opt = |s: &str| -> Result<Option<f64>, HarnessError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| format_err(format!("bad number `{s}`")))
        }
    };
    let mut variants = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        let label = get(0).to_string();
        variants.push(VariantSummary {
            method: label.split('-').next().unwrap_or("").to_string(),
            rho: opt(get(1))?,
            mode: get(2).to_string(),
            f_evals_avg: opt(get(3))?,
            grad_evals_avg: opt(get(4))?,
            elapsed_avg: opt(get(5))?,
            reached_precision: get(6).parse().map_err(|_| format_err("bad reached_precision"))?,
            gain: opt(get(7))?,
            diverged: get(8).parse().map_err(|_| format_err("bad diverged count"))?,
            runs: 0,
            label,
        });
    }
    Ok(ComparisonSummary { metric, variants })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::summary::summarize;

    fn sample() -> TraceRecord {
        let mut fp = Fingerprint::default();
        fp.set("method", "gd");
        fp.set("mode", "adaptive");
        fp.set("rho", "0.3");
        fp.set("policy", "");
        TraceRecord {
            fingerprint: fp,
            termination: Some(Termination::Converged),
            rows: vec![
                TraceRow {
                    iter: 0,
                    objective: std::f64::consts::LN_2,
                    gap: Some(0.1 + 0.2),
                    alpha: None,
                    f_evals: 1,
                    grad_evals: 0,
                    crit_evals: 0,
                    prox_evals: 0,
                    elapsed_s: 0.0,
                },
                TraceRow {
                    iter: 1,
                    objective: 1.0 / 3.0,
                    gap: Some(f64::MIN_POSITIVE),
                    alpha: Some(1e-300),
                    f_evals: 4,
                    grad_evals: 1,
                    crit_evals: 3,
                    prox_evals: 0,
                    elapsed_s: 1.25e-5,
                },
            ],
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let mut buf = Vec::new();
        write_trace(&TraceRecord { fingerprint: Fingerprint::default(), termination: None, rows: vec![] }, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", TRACE_HEADER.join(",")));
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        assert_eq!(read_trace(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn bad_trace_rejected() {
        assert!(read_trace("iter,objective\n0,1\n".as_bytes()).is_err());
        let bad = format!("{}\nx,1,,,0,0,0,0,0\n", TRACE_HEADER.join(","));
        assert!(matches!(read_trace(bad.as_bytes()), Err(HarnessError::Format(_))));
    }

    #[test]
    fn summary_gain_column() {
        let mut regular = sample();
        regular.fingerprint.set("mode", "regular");
        regular.fingerprint.set("rho", "0.5");
        regular.rows[1].f_evals = 8;
        let s = summarize(&[regular, sample()], Some(1e-3), Metric::Fevals);
        let mut buf = Vec::new();
        write_summary(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&SUMMARY_HEADER.join(",")));
        let back = read_summary(buf.as_slice(), Metric::Fevals).unwrap();
        assert_eq!(back.gain_for("gd"), s.gain_for("gd"));
        assert_eq!(s.gain_for("gd"), Some(0.5));
    }
}
