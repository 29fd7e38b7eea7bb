//! Command implementations. Each command reads its keys from the config,
//! writes data files into `--out`, and finishes by writing `manifest.json`
//! (also on failure, carrying the error). Exit code 0 means every gate in the
//! invoked command passed; 2 marks configuration rejection.

pub mod barriers;
pub mod expansion;
pub mod linearized;
pub mod profile;
pub mod report;
pub mod simulate;
pub mod sweep;

use std::path::Path;

use anyhow::{Context, Result};
use vshock::ModelParams;

use crate::config::Config;
use crate::manifest::CommandLog;

/// Exit status carried through main.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    GateFailure,
    ConfigRejected,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::GateFailure => 1,
            Outcome::ConfigRejected => 2,
        }
    }
}

/// Model parameters from `model.*` keys; rejection is a config error
/// (exit code 2).
pub fn model_params(cfg: &Config) -> Result<std::result::Result<ModelParams, String>> {
    let eps = cfg.get_f64("model.epsilon", 1e-3)?;
    let gamma = cfg.get_f64("model.gamma", 2.0)?;
    let mu = cfg.get_f64("model.mu", 1.0)?;
    let v_plus = cfg.get_f64("model.v_plus", 1.5)?;
    let u_plus = cfg.get_f64("model.u_plus", 0.0)?;
    Ok(match ModelParams::new(eps, gamma, mu, v_plus) {
        Ok(p) => Ok(p.with_u_plus(u_plus)),
        Err(e) => Err(e.to_string()),
    })
}

pub fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

/// Run a command body, writing the manifest on both success and failure.
pub fn execute(
    name: &str,
    out: &Path,
    cfg: &Config,
    body: impl FnOnce(&mut CommandLog) -> Result<()>,
) -> Result<Outcome> {
    ensure_out_dir(out)?;
    let mut log = CommandLog::new(name);
    let result = body(&mut log);
    match result {
        Ok(()) => {
            let manifest = log.finish(out, cfg.resolved(), None)?;
            Ok(if manifest.passed { Outcome::Pass } else { Outcome::GateFailure })
        }
        Err(e) => {
            let msg = format!("{e:#}");
            eprintln!("error: {msg}");
            let rejected = msg.contains("invalid parameters") || msg.contains("usage error");
            log.finish(out, cfg.resolved(), Some(msg))?;
            Ok(if rejected { Outcome::ConfigRejected } else { Outcome::GateFailure })
        }
    }
}
