//! Command-line driver, file formats and parallel runners for `wsfbm-core`.

pub mod cli;
pub mod config;
pub mod manifest;
pub mod output;
pub mod parallel;
pub mod verify;
