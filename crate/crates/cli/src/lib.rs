//! Scenario runner for the `qcomm` library: reads a JSON scenario, builds
//! the transmitter states, path and receiver family, evaluates the
//! conditional probability tables at each requested cut and writes the
//! artifacts together with a validation report.

pub mod analysis;
pub mod catalog;
pub mod report;
pub mod run;
pub mod scenario;

pub use catalog::{bundled, bundled_names, BundledScenario};
pub use report::{Check, Report, REPORT_SCHEMA};
pub use run::{run_scenario, RunOutput};
pub use scenario::Scenario;

/// Problems with the scenario itself, as opposed to failed checks.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Read(String, String),
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario {0}")]
    Invalid(String),
    #[error("unknown scenario {name:?}; bundled scenarios are: {}", valid.join(", "))]
    Unknown { name: String, valid: Vec<String> },
    #[error("cannot write artifacts: {0}")]
    Output(String),
}
