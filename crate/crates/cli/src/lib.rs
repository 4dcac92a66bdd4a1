//! Config-driven experiment runner: parameter sweeps written as CSV or JSON,
//! the verification suite as JSON lines, and SVG plots of sweep output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod presets;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use sweep::{run_sweep, ResultRow, COLUMNS};
