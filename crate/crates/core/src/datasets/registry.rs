//! Named datasets resolved against a local data directory.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use super::{parse_libsvm, DatasetError, SparseDataset};

/// Environment variable naming the data directory.
pub const DATA_DIR_ENV: &str = "ABLS_DATA_DIR";

/// Target suboptimality per method for one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precisions {
    pub agd: f64,
    pub gd: f64,
    pub gd_monotone: f64,
    pub adagrad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegisteredDataset {
    pub name: &'static str,
    /// File names tried in order inside the data directory.
    pub files: &'static [&'static str],
    pub n: usize,
    pub d: usize,
    pub precisions: Precisions,
}

const fn precisions(agd: f64, gd: f64, gd_monotone: f64, adagrad: f64) -> Precisions {
    Precisions {
        agd,
        gd,
        gd_monotone,
        adagrad,
    }
}

/// The binary classification datasets with their reference sizes and the
/// precision targets used for the logistic regression comparisons.
pub const REGISTRY: [RegisteredDataset; 7] = [
    RegisteredDataset {
        name: "a9a",
        files: &["a9a", "a9a.txt"],
        n: 32561,
        d: 123,
        precisions: precisions(1e-9, 1e-6, 1e-5, 1e-6),
    },
    RegisteredDataset {
        name: "gisette_scale",
        files: &["gisette_scale", "gisette_scale.txt"],
        n: 6000,
        d: 5000,
        precisions: precisions(1e-9, 1e-9, 1e-5, 1e-9),
    },
    RegisteredDataset {
        name: "mnist",
        files: &["mnist", "mnist.scale", "mnist.txt"],
        n: 60000,
        d: 784,
        precisions: precisions(1e-9, 1e-6, 1e-3, 1e-9),
    },
    RegisteredDataset {
        name: "mushrooms",
        files: &["mushrooms", "mushrooms.txt"],
        n: 8124,
        d: 112,
        precisions: precisions(1e-9, 1e-9, 1e-5, 1e-9),
    },
    RegisteredDataset {
        name: "phishing",
        files: &["phishing", "phishing.txt"],
        n: 11055,
        d: 68,
        precisions: precisions(1e-9, 1e-9, 1e-6, 1e-6),
    },
    RegisteredDataset {
        name: "protein",
        files: &["protein", "protein.txt"],
        n: 102025,
        d: 75,
        precisions: precisions(1e-9, 1e-9, 1e-5, 1e-9),
    },
    RegisteredDataset {
        name: "web-1",
        files: &["w1a", "web-1", "w1a.txt"],
        n: 2477,
        d: 300,
        precisions: precisions(1e-9, 1e-9, 1e-8, 1e-9),
    },
];

fn canonical(name: &str) -> String {
    let lower = name.to_ascii_lowercase().replace('-', "_");
    match lower.as_str() {
        "g_scale" | "gisette" => "gisette_scale".into(),
        "w1a" | "web_1" | "web1" => "web_1".into(),
        _ => lower,
    }
}

/// Case-insensitive lookup; accepts `g_scale` and `w1a` as aliases.
pub fn lookup(name: &str) -> Option<&'static RegisteredDataset> {
    let key = canonical(name);
    REGISTRY.iter().find(|d| canonical(d.name) == key)
}

/// The explicit directory if given, else the one named by [`DATA_DIR_ENV`].
pub fn resolve_data_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Loads a registered dataset in LIBSVM format and maps its labels to
/// `{0, 1}`.
pub fn load_dataset(name: &str, data_dir: &Path) -> Result<SparseDataset, DatasetError> {
    let entry = lookup(name).ok_or_else(|| DatasetError::UnknownDataset(name.to_string()))?;
    let path = entry
        .files
        .iter()
        .map(|f| data_dir.join(f))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("none of {:?} found in {}", entry.files, data_dir.display()),
            )
        })?;
    let ds = parse_libsvm(BufReader::new(File::open(path)?))?;
    ds.binarize_labels()
}
