//! Experiment harness for `vlasov-core`: configuration, orchestration, file
//! formats, cross-run comparisons and the invariant self-test.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod exec;
pub mod harness;
pub mod io;
pub mod report;
pub mod selftest;

use std::path::{Path, PathBuf};

pub use compare::{compare, Relation, Verdict};
pub use config::{ExperimentConfig, ExperimentKind};
pub use exec::RayonExecutor;
pub use harness::run;
pub use report::RunReport;

/// Overrides the output directory of every run.
pub const OUTPUT_DIR_VAR: &str = "VLASOV_OUTPUT_DIR";
/// Overrides the worker thread count.
pub const THREADS_VAR: &str = "VLASOV_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{0}")]
    Format(String),
    #[error("reports of kinds {0} and {1} cannot be compared")]
    Incompatible(String, String),
    #[error("relation `{0}` not understood")]
    Relation(String),
    #[error("{0}")]
    Unavailable(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, e: csv::Error) -> Self {
        HarnessError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}
