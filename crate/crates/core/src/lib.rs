//! Regular and adaptive backtracking line search with GD, AGD, Adagrad and
//! FISTA, plus problem families, dataset loaders and a benchmark harness.

pub mod datasets;
pub mod harness;
pub mod linesearch;
pub mod optimizers;
pub mod problems;
