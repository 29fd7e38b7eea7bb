//! Run manifests: the provenance record of every command invocation.
//!
//! The manifest is written last, on success and on failure alike, so its
//! presence marks a completed (and fully flushed) run; failure manifests
//! carry the error.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    /// Comparison that defines passing, e.g. "<=", ">=".
    pub cmp: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub max_residuals: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    pub passed: bool,
    pub error: Option<String>,
    pub determinism: String,
}

/// Accumulates outputs/gates while a command runs.
pub struct CommandLog {
    pub command: String,
    started: Instant,
    pub outputs: Vec<String>,
    pub gates: Vec<Gate>,
    pub max_residuals: BTreeMap<String, f64>,
}

impl CommandLog {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            started: Instant::now(),
            outputs: Vec::new(),
            gates: Vec::new(),
            max_residuals: BTreeMap::new(),
        }
    }

    pub fn output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        let e = self.max_residuals.entry(name.to_string()).or_insert(0.0);
        *e = e.max(value);
    }

    pub fn gate(&mut self, name: impl Into<String>, value: f64, threshold: f64, cmp: &str) -> bool {
        let passed = match cmp {
            "<=" => value <= threshold,
            "<" => value < threshold,
            ">=" => value >= threshold,
            ">" => value > threshold,
            other => panic!("unknown comparison {other}"),
        };
        let name = name.into();
        println!(
            "[{}] {} {}: {:.6e} {} {:.6e}",
            if passed { "PASS" } else { "FAIL" },
            self.command,
            name,
            value,
            cmp,
            threshold
        );
        self.gates.push(Gate { name, passed, value, threshold, cmp: cmp.to_string() });
        passed
    }

    pub fn all_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn finish(
        self,
        out_dir: &Path,
        config: BTreeMap<String, String>,
        error: Option<String>,
    ) -> Result<RunManifest> {
        let passed = error.is_none() && self.all_passed();
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            outputs: self.outputs,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            max_residuals: self.max_residuals,
            gates: self.gates,
            passed,
            error,
            determinism: "seed-free: outputs are pure functions of the resolved config"
                .to_string(),
        };
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
