//! File formats, configuration, reports and block-parallel drivers around
//! `qhm-core`, plus the check suites behind the `qhm` command line.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod parallel;
pub mod report;
pub mod suites;
