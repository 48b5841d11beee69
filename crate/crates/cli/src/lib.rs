//! Batch front-end for `resonance-core`: configuration loading, parallel
//! separation scans, delimited or JSON output, and summary reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod report;
pub mod scan;

use thiserror::Error;

pub use crate::config::{ResolvedScan, ScanConfig};
pub use crate::report::{run_report, Report};
pub use crate::scan::{run_scan, Column, ScanTable};

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed configuration, missing file, bad flag.
    #[error("{0}")]
    Input(String),
    /// The physics routines refused a scan point.
    #[error("{0}")]
    Physics(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Physics(_) => 3,
        }
    }
}
