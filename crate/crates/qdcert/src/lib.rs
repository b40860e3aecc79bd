//! Scenario files, certification runs and reports on top of `qdcert-core`.

pub mod files;
pub mod report;
pub mod run;
pub mod scenario;

pub use report::{emit, Format, Report, ReportError, SweepRow, CSV_HEADER};
pub use run::{input_hash, run, RunOptions};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError};
