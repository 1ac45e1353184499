//! Std front end for `cag-core`: law and config files, replicate-parallel
//! Monte Carlo, threshold sweeps and the `cag` command line.

pub mod cli;
pub mod error;
pub mod format;
pub mod montecarlo;
pub mod report;
pub mod sweep;

pub use cag_core;
pub use error::{AppError, AppResult};
