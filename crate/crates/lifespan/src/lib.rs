//! Files, command-line interface and threaded runners around
//! [`lifespan_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod parallel;
pub mod scenario;

pub use error::{CliError, CliResult};
