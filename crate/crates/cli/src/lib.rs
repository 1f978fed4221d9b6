//! Command-line driver for gauged quantum-walk simulations.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod table;

pub use config::RunConfig;
pub use error::CliError;
