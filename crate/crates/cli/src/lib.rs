//! Command-line front end for `specshare`: flat key=value configuration,
//! CSV output for solves, metrics, distributions and sweeps, and a
//! validation report.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv;
pub mod sweep;
pub mod validate;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration, already located.
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] specshare::Error),
    #[error("{failed} of {total} sweep rows failed")]
    RowsFailed { failed: usize, total: usize },
    #[error("{0} validation checks failed")]
    ValidationFailed(usize),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
