//! Library surface of the `diffdrive` command-line tool: configuration
//! parsing, output writers, and scenario definitions. The binary in
//! `main.rs` is a thin argument-parsing layer over these modules.

pub mod config;
pub mod output;
pub mod scenario;
