use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nlt_cli::presets::PRESETS;

fn nlt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlt"))
        .args(args)
        .env("NLT_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).expect("header line")
}

#[test]
fn every_preset_shares_the_golden_columns_and_echoes_its_config() {
    let golden = include_str!("golden/columns.csv").trim_end();
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in PRESETS {
        let o = nlt(&["sweep", "--preset", name, "--samples", "100000", "--out", "-"], dir.path());
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = stdout(&o);
        assert_eq!(header(&csv), golden, "{name}");
        let comments: Vec<&str> = csv.lines().filter(|l| l.starts_with('#')).collect();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            assert!(comments.iter().any(|c| c.ends_with(line)), "{name}: `{line}` not echoed");
        }
        let cfg = nlt_cli::ExperimentConfig::from_toml(text).unwrap();
        let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
        assert_eq!(rows, cfg.sweep.grid.len() * cfg.scenario.nonlinearities.len(), "{name}");
        assert!(!csv.contains("error"), "{name}: {csv}");
    }
}

#[test]
fn sweep_is_byte_identical_under_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, file: &str| {
        let out = dir.path().join(file);
        let o = nlt(
            &["sweep", "--preset", "fig3", "--samples", "20000", "--seed", seed, "--out", out.to_str().unwrap()],
            dir.path(),
        );
        assert!(o.status.success());
        fs::read(out).unwrap()
    };
    let a = run("5", "a.csv");
    assert_eq!(a, run("5", "b.csv"));
    assert_ne!(a, run("6", "c.csv"));
    // the preset asks for a gains plot next to the CSV
    let svg = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn default_output_goes_to_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlt(&["sweep", "--preset", "fig4", "--samples", "10000", "--format", "json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("fig4.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    assert_eq!(v["config"]["engine"]["samples"], 10000);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, PRESETS[0].1.replace("grid =", "grdi =")).unwrap();
    let o = nlt(&["sweep", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grdi") && err.contains("line"), "{err}");
}

#[test]
fn verify_exit_status_tracks_unexpected_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let ok = nlt(&["verify", "theorem6", "char_condition:gauss_laplace"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&ok).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["expected_failure"], true);
    assert_eq!(lines[1]["passed"], false);
    assert_eq!(lines[1]["as_expected"], true);

    // too few samples to separate the Laplace gains: the expected failures pass
    let starved = nlt(&["verify", "theorem5", "--samples", "2000", "--seed", "3"], dir.path());
    assert_eq!(starved.status.code(), Some(1));

    let unknown = nlt(&["verify", "theorem99"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn verify_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "theorem3", "--samples", "50000", "--seed", "7"];
    let a = nlt(&args, dir.path());
    let b = nlt(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn preset_list_names_every_figure() {
    let dir = tempfile::tempdir().unwrap();
    let list = stdout(&nlt(&["preset", "list"], dir.path()));
    for (name, _) in PRESETS {
        assert!(list.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn plot_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "# comment\na,b\n1,2\n").unwrap();
    let o = nlt(&["plot", path.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unexpected columns"));
}
