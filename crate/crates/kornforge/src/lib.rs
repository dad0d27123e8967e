//! File formats, JSON/CSV reports and the `kornforge` command-line tool
//! built on [`kornforge_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

pub use error::{exit, AppError, AppResult};
