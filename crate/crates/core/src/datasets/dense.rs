//! Comma-delimited dense matrices and rating triplet files.

use ndarray::Array2;
use std::io::{BufRead, Read, Write};

use super::DatasetError;

/// Reads a comma-delimited matrix, one row per line, no header.
pub fn parse_dense_csv<R: Read>(reader: R) -> Result<Array2<f64>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            DatasetError::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(n_rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match n_cols {
            None => n_cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(DatasetError::parse(line, format!("expected {c} fields, found {}", record.len())));
            }
            Some(_) => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| DatasetError::parse(line, format!("field `{field}` is not a number")))?;
            values.push(v);
        }
        n_rows += 1;
    }
    let n_cols = n_cols.unwrap_or(0);
    Ok(Array2::from_shape_vec((n_rows, n_cols), values).expect("row lengths checked"))
}

/// Writes a matrix in the format read by [`parse_dense_csv`], with values in
/// their shortest exact form.
pub fn write_dense_csv<W: Write>(a: &Array2<f64>, writer: W) -> Result<(), DatasetError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in a.rows() {
        wtr.write_record(row.iter().map(|v| format!("{v:?}")))
            .map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads whitespace-separated `user item rating [timestamp]` lines with
/// 1-based ids into a dense `users x items` matrix with zeros for missing
/// ratings.
pub fn parse_rating_triplets<R: BufRead>(reader: R) -> Result<Array2<f64>, DatasetError> {
    let mut triplets = Vec::new();
    let (mut m, mut n) = (0usize, 0usize);
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(DatasetError::parse(line_no, "expected user, item and rating"));
        }
        let id = |s: &str| -> Result<usize, DatasetError> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(DatasetError::parse(line_no, format!("id `{s}` is not a positive integer"))),
            }
        };
        let (u, i) = (id(fields[0])?, id(fields[1])?);
        let r: f64 = fields[2]
            .parse()
            .map_err(|_| DatasetError::parse(line_no, format!("rating `{}` is not a number", fields[2])))?;
        m = m.max(u + 1);
        n = n.max(i + 1);
        triplets.push((u, i, r));
    }
    let mut a = Array2::zeros((m, n));
    for (u, i, r) in triplets {
        a[[u, i]] = r;
    }
    Ok(a)
}
