use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const VERSION: &str = concat!("meanfield-lab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Deterministic record of one run. Wall time is kept out of the JSON so
/// that reruns with one thread are byte-identical; it is written to
/// `timing.json` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub outputs: serde_json::Value,
    pub files: Vec<String>,
    pub verdicts: Vec<Check>,
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.name().into(),
            version: VERSION.into(),
            config: config.clone(),
            outputs: serde_json::Value::Null,
            files: Vec::new(),
            verdicts: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|c| c.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Check> {
        self.verdicts.iter().find(|c| c.name == name)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)? + "\n")?;
        let timing = serde_json::json!({ "wall_time_seconds": self.wall_time_seconds });
        std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
        Ok(())
    }
}
