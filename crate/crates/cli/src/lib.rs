//! Command implementations behind the `diraclab` binary.

pub mod commands;
pub mod config;
pub mod output;
