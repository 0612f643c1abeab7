//! Scenarios shipped with the binary.

use crate::scenario::Scenario;
use crate::ConfigError;

pub struct BundledScenario {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(BundledScenario { name: $name, source: include_str!(concat!("../scenarios/", $name, ".json")) }),*]
    };
}

pub const CATALOG: &[BundledScenario] = bundle![
    "binomial-loss",
    "coherent-noise",
    "gain-duality",
    "squeezed-loss",
    "sequential-squeezed",
    "spin-trine",
    "singlet-correlations",
    "cut-sweep",
];

pub fn bundled_names() -> Vec<String> {
    CATALOG.iter().map(|b| b.name.to_string()).collect()
}

pub fn bundled(name: &str) -> Result<Scenario, ConfigError> {
    let entry = CATALOG
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| ConfigError::Unknown { name: name.to_string(), valid: bundled_names() })?;
    Scenario::from_json(entry.source)
}

/// Multi-line description for `describe`.
pub fn describe(name: &str) -> Result<String, ConfigError> {
    let s = bundled(name)?;
    let entry = CATALOG.iter().find(|b| b.name == name).expect("found above");
    Ok(format!(
        "{}\n\n{}\n\nReproduces: {}\n\nScenario file:\n{}",
        s.name,
        s.description,
        s.reproduces,
        entry.source.trim_end()
    ))
}
