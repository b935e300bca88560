//! Command-line front end: configuration, scenario execution and artifact output.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod parallel;
pub mod presets;
pub mod run;
