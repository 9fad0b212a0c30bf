//! Manifest-driven runs of identity checks, class computations and parameter sweeps.

pub mod manifest;
pub mod report;
mod runner;

use thiserror::Error;

pub use manifest::{Manifest, Model};
pub use report::{Report, Status, TaskReport};
pub use runner::{check_identity, run, summarize, sweep, write_csv, RunOptions, SweepRow, SweepSummary, CSV_HEADER};

/// Unreadable or invalid input: exit status 2.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct InputError(pub String);

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TASK_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

/// Environment variable seeding generic instances.
pub const SEED_VAR: &str = "FOLCHAR_SEED";
