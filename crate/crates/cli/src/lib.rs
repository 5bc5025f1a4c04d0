//! Library side of the `ising` command-line tool: experiment grids, CSV
//! emission, and parameter resolution. The binary in `main.rs` is a thin
//! clap layer over these functions.

pub mod analyze;
pub mod config;
pub mod csvout;
pub mod error;
pub mod experiments;
pub mod gnuplot;

pub use error::{CliError, EXIT_DOMAIN, EXIT_USAGE};
