//! End-to-end tests of the command-line interface: exit codes, determinism,
//! manifest semantics, report aggregation.

use std::path::Path;
use std::process::Command;

fn vshock() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vshock"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn profile_is_deterministic_and_writes_manifest_last() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let status = vshock()
            .args(["profile", "--out"])
            .arg(out)
            .args(["--set", "model.gamma=2", "--set", "profile.epsilons=1e-2,1e-3"])
            .args(["--set", "profile.xi_lo=-4", "--set", "profile.xi_hi=10"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["profile_00_eps1.000e-2.csv", "profile_01_eps1.000e-3.csv", "limit_profile.csv", "overlay.dat"]
    {
        assert_eq!(read(&out1.join(name)), read(&out2.join(name)), "{name} not byte-identical");
    }
    // manifest lists every output file
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&out1.join("manifest.json"))).unwrap();
    let outputs: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for name in ["profile_00_eps1.000e-2.csv", "limit_profile.csv", "overlay.dat"] {
        assert!(outputs.iter().any(|o| o == name), "{name} missing from manifest");
    }
    assert_eq!(manifest["passed"], serde_json::Value::Bool(true));
}

#[test]
fn config_rejection_exits_2_with_failure_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let status = vshock()
        .args(["profile", "--out"])
        .arg(&out)
        .args(["--set", "model.epsilon=0.5", "--set", "model.v_plus=1.2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["passed"], serde_json::Value::Bool(false));
    assert!(manifest["error"].as_str().unwrap().contains("v_plus"));
}

#[test]
fn config_file_with_set_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "model.gamma = 2 # comment\nprofile.epsilons = 1e-2\nprofile.xi_lo = -4\nprofile.xi_hi = 8\n")
        .unwrap();
    let out = dir.path().join("out");
    let status = vshock()
        .args(["profile", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .args(["--set", "model.gamma=1"])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["model.gamma"], "1");
}

#[test]
fn report_aggregates_and_flags_missing() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert!(vshock()
        .args(["barriers", "--out"])
        .arg(&run)
        .args(["--set", "model.gamma=1", "--set", "barriers.epsilons=1e-3"])
        .status()
        .unwrap()
        .success());
    let rep = dir.path().join("rep");
    let output = vshock()
        .args(["report"])
        .arg(&run)
        .arg(dir.path().join("does-not-exist"))
        .args(["--out"])
        .arg(&rep)
        .output()
        .unwrap();
    // missing input forces a non-zero exit and a MISSING line
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("MISSING"));
    assert!(text.contains("PASS barriers"));
    let summary: serde_json::Value =
        serde_json::from_slice(&read(&rep.join("summary.json"))).unwrap();
    assert_eq!(summary["all_passed"], serde_json::Value::Bool(false));

    // with only valid inputs it passes
    let output = vshock().args(["report"]).arg(&run).args(["--out"]).arg(&rep).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn linearized_check_passes_and_records_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lin");
    let status = vshock()
        .args(["linearized-check", "--out"])
        .arg(&out)
        .args(["--set", "model.epsilon=1e-2", "--set", "lin.n=2000"])
        .args(["--set", "lin.dt_levels=4e-4,2e-4", "--set", "lin.t_end=0.2"])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&read(&out.join("linearized_check.json"))).unwrap();
    let ratios = json["ratios"].as_array().unwrap();
    assert_eq!(ratios.len(), 1);
}

#[test]
fn expansion_rate_slope_for_cubic_pressure_exponent() {
    // γ = 3: the transition error decays like ε^{1/4}.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp3");
    let status = vshock()
        .args(["expansion", "--out"])
        .arg(&out)
        .args(["--set", "model.gamma=3", "--set", "expansion.epsilons=1e-4,1e-5,1e-6"])
        .args(["--set", "expansion.m_margin=0.5"])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&read(&out.join("rate_fit.json"))).unwrap();
    let slope = json["slope"].as_f64().unwrap();
    assert!((slope - 0.25).abs() <= 0.15, "slope {slope}");
}
