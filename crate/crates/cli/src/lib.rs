//! Command-line and HTTP front ends for the `fraccancel` toolkit.

pub mod commands;
pub mod format;
pub mod run;
pub mod server;
