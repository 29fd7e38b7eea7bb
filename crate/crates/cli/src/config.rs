//! Flat key=value configuration with dotted namespaces.
//!
//! One file per run; `#` starts a comment; `--set key=value` overrides file
//! keys. Every key a command reads is recorded together with the value used
//! (default or explicit), so manifests carry the fully resolved config.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    resolved: Mutex<BTreeMap<String, String>>,
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    bail!("{}:{}: expected key = value", path.display(), ln + 1);
                };
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        for item in overrides {
            let Some((k, v)) = item.split_once('=') else {
                bail!("--set '{item}': expected key=value");
            };
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values, resolved: Mutex::new(BTreeMap::new()) })
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.lock().unwrap().insert(key.to_string(), value);
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        let v = match self.values.get(key) {
            Some(raw) => raw.parse::<f64>().with_context(|| format!("key {key} = '{raw}'"))?,
            None => default,
        };
        self.record(key, format!("{v}"));
        Ok(v)
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        let v = match self.values.get(key) {
            Some(raw) => raw.parse::<usize>().with_context(|| format!("key {key} = '{raw}'"))?,
            None => default,
        };
        self.record(key, format!("{v}"));
        Ok(v)
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        let v = match self.values.get(key) {
            Some(raw) => raw.parse::<bool>().with_context(|| format!("key {key} = '{raw}'"))?,
            None => default,
        };
        self.record(key, format!("{v}"));
        Ok(v)
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = match self.values.get(key) {
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse::<f64>().with_context(|| format!("key {key}: '{s}'")))
                .collect::<Result<Vec<_>>>()?,
            None => default.to_vec(),
        };
        self.record(
            key,
            v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
        );
        Ok(v)
    }

    /// Everything read so far, with the values actually used.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.lock().unwrap().clone()
    }

    /// A copy of this config with one key replaced (for sweep fan-out).
    pub fn with_override(&self, key: &str, value: &str) -> Self {
        let mut values = self.values.clone();
        values.insert(key.to_string(), value.to_string());
        Self { values, resolved: Mutex::new(BTreeMap::new()) }
    }
}
