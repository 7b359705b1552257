//! The JSON record written for every command run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_time_ms: u64,
    pub version: String,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, outputs: Value, seed: u64, tolerances: BTreeMap<String, f64>, wall_time_ms: u64) -> Self {
        RunReport {
            command: command.to_string(),
            inputs,
            outputs,
            seed,
            tolerances,
            wall_time_ms,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
