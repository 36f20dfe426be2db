//! Verification suites for the torus momentum-map library: configuration,
//! measurement groups, the batch runner and its JSON/CSV reports.

pub mod checks;
pub mod config;
pub mod report;
pub mod runner;

pub use config::{ConfigError, Suite, SuiteConfig};
pub use report::{emit_convergence_table, SuiteReport};
pub use runner::{run_record, run_suites, RecordSelector};
