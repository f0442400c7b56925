//! Command-line front end for `fractree`: test data generation, MAP
//! denoising, prior sampling, Monte Carlo analysis and error metrics.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

pub use args::Cli;
pub use commands::{run, RunConfig};
pub use error::{CliError, CliResult};
