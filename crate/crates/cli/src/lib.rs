//! Library surface of the command-line tool: the state-file container and
//! the run-configuration format (kept importable for integration tests).

pub mod config;
pub mod statefile;
pub mod svg;
