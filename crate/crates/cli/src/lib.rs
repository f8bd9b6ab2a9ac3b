//! IO, configuration, run artifacts, and the command implementations behind
//! the `nemcast` binary. All numerics live in `nemcast-core`; this crate
//! only moves data in and out of files.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, ErrorKind};
