//! End-to-end runs of the `ngfiber` binary.

use std::path::Path;
use std::process::{Command, Output};

use ngfiber_cli::commands::{observe, plan_sweep};
use ngfiber_cli::config::{self, Observable};
use ngfiber_cli::{EXIT_PARAMETER, EXIT_OK};
use serde_json::{Map, Value};

fn ngfiber(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngfiber")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut full = vec!["--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    let status = ngfiber(&full);
    assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out).unwrap()
}

const SWEEP: &str = "\
[bath]
temperature = 0.5
omega_phonon = 2.62e10
[channel]
gamma_plus = 1e5
[grid]
zeta = [0.2, 0.4]
tau_l = { start = 0.0, stop = 2e-5, steps = 3 }
p = [0, 1]
[output]
observables = [\"negativity\", \"negativity_dephased\", \"fidelity\"]
";

const SWEEP_PERMUTED: &str = "\
[output]
observables = [\"negativity\", \"negativity_dephased\", \"fidelity\"]
[grid]
p = [0, 1]
tau_l = { start = 0.0, stop = 2e-5, steps = 3 }
zeta = [0.2, 0.4]
[channel]
gamma_plus = 1e5
[bath]
omega_phonon = 2.62e10
temperature = 0.5
";

#[test]
fn every_command_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, SWEEP).unwrap();
    let cfg = cfg.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["fig1"],
        vec!["fig2", "--steps", "40"],
        vec!["design"],
        vec!["--format", "json", "design"],
        vec!["--config", cfg, "sweep"],
        vec!["--format", "json", "--config", cfg, "sweep"],
        vec!["validate", "--level", "fast"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let a = run_to(dir.path(), &format!("a{i}"), args);
        let b = run_to(dir.path(), &format!("b{i}"), args);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn design_json_round_trips() {
    let out = ngfiber(&["--format", "json", "design", "--error-budget", "0.5"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let record: Map<String, Value> = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string(&record).unwrap();
    let back: Map<String, Value> = serde_json::from_str(&again).unwrap();
    assert_eq!(record, back);
    assert!(record["delta_max_asymptotic"].as_f64().unwrap() > 0.81e-3);
    assert_eq!(record["separated"], Value::Bool(true));
}

#[test]
fn csv_uses_full_precision_and_lf() {
    let out = ngfiber(&["fig1", "--steps", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("zeta,negativity"));
    for line in lines {
        for cell in line.split(',') {
            let mantissa = cell.split('e').next().unwrap();
            assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{cell}");
        }
    }
}

#[test]
fn sweep_order_ignores_declaration_order() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.toml");
    let b = dir.path().join("b.toml");
    std::fs::write(&a, SWEEP).unwrap();
    std::fs::write(&b, SWEEP_PERMUTED).unwrap();
    let ra = run_to(dir.path(), "a.csv", &["--config", a.to_str().unwrap(), "sweep"]);
    let rb = run_to(dir.path(), "b.csv", &["--config", b.to_str().unwrap(), "sweep"]);
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(
        text.lines().next().unwrap(),
        "p,zeta,gamma_plus,temperature,epsilon,tau_l,negativity,negativity_dephased,fidelity"
    );
}

#[test]
fn one_point_sweep_matches_single_calls_bitwise() {
    let text = "[state]\np = 2\nzeta = 0.35\n[bath]\ntemperature = 0.3\n[channel]\ngamma_plus = 2e5\ntau_l = 3e-6\n";
    let cfg = config::parse(text, Path::new("one.toml")).unwrap();
    let plan = plan_sweep(&cfg).unwrap();
    assert_eq!(plan.points.len(), 1);
    let (zeta, channel, bath) = plan.inputs(&plan.points[0]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.toml");
    std::fs::write(&path, text).unwrap();
    let csv = String::from_utf8(run_to(dir.path(), "one.csv", &["--config", path.to_str().unwrap(), "sweep"])).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    for (k, obs) in Observable::ALL.iter().enumerate() {
        let single = observe(*obs, 2, zeta, &channel, &bath).unwrap();
        let from_sweep: f64 = row[6 + k].parse().unwrap();
        assert_eq!(from_sweep.to_bits(), single.to_bits(), "{}", obs.column());
    }
}

#[test]
fn parameter_errors_exit_with_two() {
    let out = ngfiber(&["fig1", "--zeta-max", "1.5"]);
    assert_eq!(out.status.code(), Some(EXIT_PARAMETER));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zeta_min"));

    let out = ngfiber(&["sweep"]);
    assert_eq!(out.status.code(), Some(EXIT_PARAMETER));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[grid]\nzeta = [0.1]\n\ntemprature = [1.0]\n").unwrap();
    let out = ngfiber(&["--config", bad.to_str().unwrap(), "sweep"]);
    assert_eq!(out.status.code(), Some(EXIT_PARAMETER));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 4"), "{msg}");

    let out = ngfiber(&["design", "--error-budget", "1.0"]);
    assert_eq!(out.status.code(), Some(EXIT_PARAMETER));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error_budget"));
}

#[test]
fn plot_script_points_at_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    run_to(dir.path(), "curve.csv", &["--emit-plot-script", "fig2", "--steps", "10"]);
    let script = std::fs::read_to_string(dir.path().join("curve.gp")).unwrap();
    assert!(script.contains("'curve.csv' using 1:2"));
    assert!(script.contains("'curve.csv' using 1:3"));
    let out = ngfiber(&["--emit-plot-script", "fig1"]);
    assert_eq!(out.status.code(), Some(EXIT_PARAMETER));
}

#[test]
fn validate_fast_passes() {
    let out = ngfiber(&["validate"]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn shipped_example_config_runs() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sweep_example.toml");
    let out = ngfiber(&["--format", "json", "--config", path.to_str().unwrap(), "sweep"]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<Map<String, Value>> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 6);
    for row in &rows {
        let pure = row["negativity"].as_f64().unwrap();
        assert!(row["negativity_combined"].as_f64().unwrap() <= pure + 1e-12);
    }
}
