//! Command-line harness around `sff-core`: configuration, deterministic
//! parallel runs, CSV/JSON/SVG output, verification suites and figure
//! reproductions.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod runner;
pub mod snapshot;
pub mod svg;
pub mod table;
pub mod verify;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
