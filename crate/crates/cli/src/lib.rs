//! Command-line front end for `distill-core`: TOML configuration, JSON and
//! CSV output, and run manifests.

pub mod commands;
pub mod config;
pub mod emit;
