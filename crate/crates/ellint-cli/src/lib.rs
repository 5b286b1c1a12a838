//! Library half of the `ellint` binary: configuration parsing, parameter
//! files, report serialization, and the verify/converge runners. Kept as a
//! library so integration tests can exercise the report schema directly.

pub mod config;
pub mod params_file;
pub mod report;
pub mod runner;
