//! Dataset ingestion, synthetic instance generators and the named dataset
//! registry.

mod dense;
mod libsvm;
mod registry;
mod synth;

pub use dense::{parse_dense_csv, parse_rating_triplets, write_dense_csv};
pub use libsvm::{parse_libsvm, serialize_libsvm};
pub use registry::{
    load_dataset, lookup, resolve_data_dir, Precisions, RegisteredDataset, DATA_DIR_ENV, REGISTRY,
};
pub use synth::{
    synth_linear_inverse, synth_logistic, synth_logistic_with_weights, synth_ratings, LinearInverse,
};

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::problems::{CsrMatrix, Design};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("no data directory: pass --data-dir or set {DATA_DIR_ENV}")]
    MissingDataDir,
}

impl DatasetError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        DatasetError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Labeled sparse rows with 0-based, strictly increasing feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<f64>,
    n_features: usize,
}

impl SparseDataset {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, labels: Vec<f64>, n_features: usize) -> Result<Self, DatasetError> {
        if rows.len() != labels.len() {
            return Err(DatasetError::InvalidParameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(DatasetError::InvalidParameter(format!(
                    "row {i} has nonincreasing feature indices"
                )));
            }
            if row.last().is_some_and(|&(j, _)| j >= n_features) {
                return Err(DatasetError::InvalidParameter(format!(
                    "row {i} exceeds {n_features} features"
                )));
            }
        }
        Ok(Self {
            rows,
            labels,
            n_features,
        })
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Number of features.
    pub fn d(&self) -> usize {
        self.n_features
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn label_array(&self) -> Array1<f64> {
        Array1::from(self.labels.clone())
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n(), self.d()));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[[i, j]] = v;
            }
        }
        out
    }

    /// Data matrix for the objectives: dense storage when at least half the
    /// entries are nonzero, row-compressed otherwise.
    pub fn design(&self) -> Design {
        if 2 * self.nnz() >= self.n() * self.d() {
            Design::Dense(self.to_dense())
        } else {
            Design::Sparse(CsrMatrix::from_rows(&self.rows, self.n_features).expect("indices validated"))
        }
    }

    /// Maps two distinct label values to `{0, 1}` (smaller to 0); labels
    /// already in `{0, 1}` are kept.
    pub fn binarize_labels(mut self) -> Result<Self, DatasetError> {
        if self.labels.iter().all(|&y| y == 0.0 || y == 1.0) {
            return Ok(self);
        }
        let mut distinct: Vec<f64> = Vec::new();
        for &y in &self.labels {
            if !distinct.contains(&y) {
                distinct.push(y);
            }
            if distinct.len() > 2 {
                return Err(DatasetError::InvalidParameter(
                    "labels take more than two values".into(),
                ));
            }
        }
        let low = distinct.iter().copied().fold(f64::INFINITY, f64::min);
        for y in &mut self.labels {
            *y = if *y == low && distinct.len() == 2 { 0.0 } else { 1.0 };
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_rows() {
        assert!(SparseDataset::new(vec![vec![(1, 1.0), (1, 2.0)]], vec![1.0], 3).is_err());
        assert!(SparseDataset::new(vec![vec![(3, 1.0)]], vec![1.0], 3).is_err());
        assert!(SparseDataset::new(vec![vec![]], vec![], 3).is_err());
    }

    #[test]
    fn binarizes_two_valued_labels() {
        let ds = SparseDataset::new(vec![vec![], vec![], vec![]], vec![2.0, 1.0, 2.0], 1).unwrap();
        assert_eq!(ds.binarize_labels().unwrap().labels(), &[1.0, 0.0, 1.0]);
        let bad = SparseDataset::new(vec![vec![], vec![], vec![]], vec![2.0, 1.0, 3.0], 1).unwrap();
        assert!(bad.binarize_labels().is_err());
    }

    #[test]
    fn design_storage_follows_density() {
        let dense = SparseDataset::new(vec![vec![(0, 1.0), (1, 2.0)]], vec![1.0], 2).unwrap();
        assert!(matches!(dense.design(), Design::Dense(_)));
        let sparse = SparseDataset::new(vec![vec![(0, 1.0)], vec![]], vec![1.0, 0.0], 4).unwrap();
        assert!(matches!(sparse.design(), Design::Sparse(_)));
        assert_eq!(sparse.to_dense()[[0, 0]], 1.0);
    }
}
