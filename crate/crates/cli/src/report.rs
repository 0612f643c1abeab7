use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = "qcomm-report/1";

/// One named invariant check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured defect or value, when there is one.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value: Some(value), tolerance: Some(tolerance), detail: String::new() }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value: None, tolerance: None, detail: detail.into() }
    }

    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::flag(name, false, err.to_string())
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRecord {
    pub state: String,
    pub channel: String,
    pub cut: f64,
    pub tail_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: String,
    pub dim: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub tail_masses: Vec<TailRecord>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(scenario: &str, dim: usize) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            scenario: scenario.to_string(),
            dim,
            passed: true,
            checks: Vec::new(),
            tail_masses: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.passed {
            log::warn!("{}: check {} failed {}", self.scenario, check.name, check.detail);
        }
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_check_fails_report() {
        let mut r = Report::new("x", 4);
        r.push(Check::within("a", 1e-10, 1e-9));
        assert!(r.passed);
        r.push(Check::within("b", 2.0, 1.0));
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"schema\":\"qcomm-report/1\""));
    }
}
