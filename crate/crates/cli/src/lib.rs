//! Library half of the `lgg` command-line tool: file formats, the
//! deterministic run report, command implementations and the synthetic
//! few-label benchmark. The binary in `main.rs` only parses arguments
//! and maps errors to exit codes.

pub mod bench;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
pub use report::RunReport;
