//! Command-line front end for holomimo: scenario files, subcommands and
//! machine-readable outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

pub use error::{CliError, CliResult};
