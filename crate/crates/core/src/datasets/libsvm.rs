//! LIBSVM text format: `label idx:val idx:val ...` with 1-based indices.

use std::io::{BufRead, Write};

use super::{DatasetError, SparseDataset};

fn map_label(raw: f64) -> f64 {
    if raw == -1.0 {
        0.0
    } else {
        raw
    }
}

/// Parses a LIBSVM stream. Labels `-1` become `0`; `0`, `1` and any other
/// value pass through. Blank lines are skipped; `d` is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<SparseDataset, DatasetError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut n_features = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let label: f64 = label
            .parse()
            .map_err(|_| DatasetError::parse(line_no, format!("label `{label}` is not a number")))?;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for token in tokens {
            let (idx, val) = token
                .split_once(':')
                .ok_or_else(|| DatasetError::parse(line_no, format!("token `{token}` is not idx:val")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| DatasetError::parse(line_no, format!("index `{idx}` is not a positive integer")))?;
            if idx == 0 {
                return Err(DatasetError::parse(line_no, "feature indices start at 1"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| DatasetError::parse(line_no, format!("value `{val}` is not a number")))?;
            if row.last().is_some_and(|&(prev, _)| prev >= idx - 1) {
                return Err(DatasetError::parse(line_no, format!("index {idx} is not increasing")));
            }
            row.push((idx - 1, val));
        }
        if let Some(&(j, _)) = row.last() {
            n_features = n_features.max(j + 1);
        }
        rows.push(row);
        labels.push(map_label(label));
    }
    SparseDataset::new(rows, labels, n_features)
}

/// Writes integral labels without a fraction and other values in their
/// shortest exact form, so [`parse_libsvm`] reads back identical values.
fn write_number(out: &mut impl Write, v: f64) -> std::io::Result<()> {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(out, "{}", v as i64)
    } else {
        write!(out, "{v:?}")
    }
}

pub fn serialize_libsvm<W: Write>(dataset: &SparseDataset, mut writer: W) -> Result<(), DatasetError> {
    for (row, &label) in dataset.rows().iter().zip(dataset.labels()) {
        write_number(&mut writer, label)?;
        for &(j, v) in row {
            write!(writer, " {}:", j + 1)?;
            write_number(&mut writer, v)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SparseDataset, DatasetError> {
        parse_libsvm(s.as_bytes())
    }

    #[test]
    fn single_row() {
        let ds = parse("1 1:0.5 3:2.0").unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.labels(), &[1.0]);
        assert_eq!(ds.rows()[0], vec![(0, 0.5), (2, 2.0)]);
        assert!(ds.d() >= 3);
    }

    #[test]
    fn label_mapping() {
        let ds = parse("-1 2:1\n+1 1:1\n0 1:2\n").unwrap();
        assert_eq!(ds.labels(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("1 3:1 2:1", 1),
            ("1 1:1\n\n1 2:x", 3),
            ("1 1:1\nfoo 1:1", 2),
            ("1 0:1", 1),
            ("1 1:1 1:2", 1),
            ("1 11", 1),
        ] {
            match parse(text) {
                Err(DatasetError::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        let ds = parse("1 1:0.1 4:-3e-7\n0\n1 2:12345.678901234567\n").unwrap();
        let mut buf = Vec::new();
        serialize_libsvm(&ds, &mut buf).unwrap();
        assert_eq!(parse_libsvm(buf.as_slice()).unwrap(), ds);
    }
}
