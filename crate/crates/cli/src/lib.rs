//! Command-line driver and HTTP service for the blueprint compiler.

pub mod commands;
pub mod server;
