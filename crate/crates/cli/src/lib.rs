//! Scenario files, reports and the command-line front end.

pub mod commands;
pub mod render;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use scenario::{parse_scenario, ScenarioFile};
pub use report::SolutionReport;
