use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aqrm_cli::config::{self, Kind};
use aqrm_cli::presets::{self, Provenance, PRESETS};
use aqrm_core::units::{ghz, mhz};

fn aqrm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqrm")).args(args).env_remove("AQRM_JOBS").output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_preset_validates() {
    let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
    for want in ["fig2", "fig3", "fig4a", "fig4c", "fig5", "fig6-row1", "fig6-row2", "fig6-row3", "fig6-row4", "gate-cnot"] {
        assert!(names.contains(&want), "missing preset {want}");
    }
    for p in PRESETS {
        let cfg = config::load(p.name, p.toml, &[]).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        assert!(!p.annotations.is_empty(), "{} has no provenance", p.name);
        assert!(cfg.validate().is_empty());
        let o = aqrm(&["validate", "--preset", p.name]);
        assert!(o.status.success(), "{}: {}", p.name, stderr(&o));
    }
}

#[test]
fn fig4c_uses_the_quoted_red_tone() {
    let p = presets::find("fig4c").unwrap();
    let cfg = config::load(p.name, p.toml, &[]).unwrap();
    assert_eq!(cfg.kind, Kind::Dynamics);
    let c = cfg.dynamics.unwrap().circuit.circuit();
    assert_eq!(c.red.frequency, ghz(15.0897));
    assert_eq!(c.blue.frequency, ghz(20.9097));
    assert!(p.annotations.iter().any(|a| a.key.ends_with("red.frequency_ghz") && a.provenance == Provenance::Quoted));
    let listing = String::from_utf8(aqrm(&["list-presets"]).stdout).unwrap();
    assert!(listing.contains("fig4c") && listing.contains("15.0897"));
}

#[test]
fn gate_cnot_sets_coupling_to_a_quarter_detuning() {
    let p = presets::find("gate-cnot").unwrap();
    let g = config::load(p.name, p.toml, &[]).unwrap().gate.unwrap();
    assert_eq!(g.g_bar_mhz, g.delta_mhz / 4.0);
    let d = g.params();
    assert!((d.gate_angle().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    assert_eq!(d.g_bar, mhz(2.5));
}

#[test]
fn empty_grid_is_an_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "empty.toml", "kind = \"cumulant\"\n\n[cumulant]\npairs = [[100.0, 1.0], [400.0, 1.0]]\nratios = []\n");
    let out = dir.path().join("out");
    for args in [vec!["validate", &path], vec!["run", &path, "--out", out.to_str().unwrap()]] {
        let o = aqrm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e = stderr(&o);
        assert!(e.contains("cumulant.ratios") && e.contains("empty.toml:5"), "{e}");
    }
    assert!(!out.exists());
}

#[test]
fn syntax_errors_point_at_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.toml", "kind = \"gate\"\n\n[gate]\ng_bar_mhz = 2.5\ndelta = 10.0\n");
    let o = aqrm(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn command_line_overrides_win_and_are_named_in_errors() {
    let p = presets::find("gate-cnot").unwrap();
    let c = config::load(p.name, p.toml, &["gate.delta_mhz=20".into(), "gate.g_bar_mhz=5.0".into()]).unwrap();
    assert_eq!(c.gate.unwrap().delta_mhz, 20.0);
    let o = aqrm(&["validate", "--preset", "gate-cnot", "--set", "gate.delta_mhz=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gate.delta_mhz") && stderr(&o).contains("--set"), "{}", stderr(&o));
}

const SMALL: &str = r#"kind = "cumulant"
seed = 7

[cumulant]
pairs = [[100.0, 1.0], [400.0, 1.0], [100.0, 0.5]]
ratios = { start = 0.96, stop = 1.04, points = 9 }
"#;

fn without_run_block(manifest: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(manifest).unwrap();
    v.as_object_mut().unwrap().remove("run").expect("run block");
    v
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let outs: Vec<_> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for (i, out) in outs.iter().enumerate() {
        // different worker counts must not change the data
        let jobs = if i == 0 { "1" } else { "3" };
        let o = aqrm(&["run", &cfg, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4, "{names:?}");
    for n in &names {
        let a = fs::read_to_string(outs[0].join(n)).unwrap();
        let b = fs::read_to_string(outs[1].join(n)).unwrap();
        if n == "manifest.json" {
            assert_eq!(without_run_block(&a), without_run_block(&b));
        } else {
            assert_eq!(a, b, "{n:?} differs");
        }
    }
    let csv = fs::read_to_string(outs[0].join("cumulant.csv")).unwrap();
    assert!(csv.starts_with("# units: "));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(outs[0].join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "ok");
    assert!(report["results"]["crossings"].as_array().unwrap().len() >= 2);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(outs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 7);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["run"]["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn jobs_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = Command::new(env!("CARGO_BIN_EXE_aqrm"))
        .args(["run", "--preset", "gate-cnot", "--out", out.to_str().unwrap()])
        .env("AQRM_JOBS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["run"]["jobs"], 2);
}

#[test]
fn numeric_failure_exits_3_and_keeps_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // the first anisotropy converges; the second cannot within the cap
    let cfg = write(
        dir.path(),
        "fail.toml",
        r#"kind = "sweep-fs"
cutoff = { kind = "converge", tol = 1e-9, start = 16, cap = 32 }

[sweep-fs]
etas = [1.0, 5000.0]
lambdas = [1.0]
ratios = [0.5, 1.5]
"#,
    );
    let out = dir.path().join("o");
    let o = aqrm(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "numeric-failure");
    assert_eq!(report["complete"], false);
    assert!(report["error"].as_str().unwrap().contains("not converged"), "{}", report["error"]);
    let csv = fs::read_to_string(out.join("fs_curves.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "units, header and the converged curve's two rows:\n{csv}");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "numeric-failure");
}

#[test]
fn gate_run_reports_the_ideal_gate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = aqrm(&["run", "--preset", "gate-cnot", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(r["results"]["gate"]["max_deviation"].as_f64().unwrap() < 1e-3);
    let csv = fs::read_to_string(out.join("gate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 16);
}
