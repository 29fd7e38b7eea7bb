//! `vshock report`: aggregate manifests from previous runs into one JSON +
//! text summary with a pass/fail line per recorded gate.

use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::Serialize;

use crate::commands::Outcome;
use crate::manifest::{read_manifest, RunManifest};

#[derive(Serialize)]
struct ReportSummary {
    inputs: Vec<String>,
    missing: Vec<String>,
    commands: Vec<CommandSummary>,
    all_passed: bool,
}

#[derive(Serialize)]
struct CommandSummary {
    source: String,
    command: String,
    passed: bool,
    error: Option<String>,
    gates: Vec<GateLine>,
}

#[derive(Serialize)]
struct GateLine {
    name: String,
    passed: bool,
    value: f64,
    threshold: f64,
    cmp: String,
}

fn find_manifests(path: &Path, found: &mut Vec<PathBuf>) {
    if path.is_file() {
        found.push(path.to_path_buf());
        return;
    }
    let direct = path.join("manifest.json");
    if direct.is_file() {
        found.push(direct);
    }
    if let Ok(entries) = std::fs::read_dir(path) {
        let mut subs: Vec<PathBuf> = entries.flatten().map(|e| e.path()).collect();
        subs.sort();
        for sub in subs {
            if sub.is_dir() {
                find_manifests(&sub, found);
            }
        }
    }
}

pub fn run(inputs: &[PathBuf], out: &Path) -> Result<Outcome> {
    crate::commands::ensure_out_dir(out)?;
    let mut manifests: Vec<(PathBuf, RunManifest)> = Vec::new();
    let mut missing = Vec::new();
    for input in inputs {
        if !input.exists() {
            missing.push(input.display().to_string());
            continue;
        }
        let mut found = Vec::new();
        find_manifests(input, &mut found);
        if found.is_empty() {
            missing.push(format!("{} (no manifest.json found)", input.display()));
        }
        for path in found {
            match read_manifest(&path) {
                Ok(m) => manifests.push((path, m)),
                Err(e) => missing.push(format!("{}: {e:#}", path.display())),
            }
        }
    }

    let mut text = String::new();
    let mut all_passed = missing.is_empty();
    let mut commands = Vec::new();
    for (path, m) in &manifests {
        all_passed &= m.passed;
        text.push_str(&format!(
            "{} {} ({:.2}s) [{}]\n",
            if m.passed { "PASS" } else { "FAIL" },
            m.command,
            m.wall_clock_seconds,
            path.display()
        ));
        if let Some(err) = &m.error {
            text.push_str(&format!("     error: {err}\n"));
        }
        for g in &m.gates {
            text.push_str(&format!(
                "     [{}] {}: {:.6e} {} {:.6e}\n",
                if g.passed { "PASS" } else { "FAIL" },
                g.name,
                g.value,
                g.cmp,
                g.threshold
            ));
        }
        commands.push(CommandSummary {
            source: path.display().to_string(),
            command: m.command.clone(),
            passed: m.passed,
            error: m.error.clone(),
            gates: m
                .gates
                .iter()
                .map(|g| GateLine {
                    name: g.name.clone(),
                    passed: g.passed,
                    value: g.value,
                    threshold: g.threshold,
                    cmp: g.cmp.clone(),
                })
                .collect(),
        });
    }
    for miss in &missing {
        text.push_str(&format!("MISSING {miss}\n"));
    }
    text.push_str(&format!("overall: {}\n", if all_passed { "PASS" } else { "FAIL" }));
    print!("{text}");

    let summary = ReportSummary {
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        missing,
        commands,
        all_passed,
    };
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    std::fs::write(out.join("summary.txt"), text)?;
    Ok(if all_passed { Outcome::Pass } else { Outcome::GateFailure })
}
