//! Scenario runner and diagnostics front end for the fieldflow library.

pub mod commands;
pub mod config;
pub mod scenario;
pub mod snapshot;
