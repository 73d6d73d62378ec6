use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn possq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_possq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn dir_arg(dir: &Path) -> String {
    format!("output.dir={}", dir.display())
}

/// Data rows of a CSV written by the tool: header comment and column line dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# possq "));
    lines.next().unwrap();
    lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn run_with_defaults_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir_arg(dir.path());
    let o = possq(&[
        "run",
        "--set",
        &d,
        "--set",
        "experiment.runs=3",
        "--set",
        "filter.particles=200",
        "--set",
        "scenario.scans=8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rms = rows(&dir.path().join("rms.csv"));
    assert_eq!(rms.len(), 8);
    let runs = rows(&dir.path().join("runs.csv"));
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r[3] == "true" || r[3] == "false"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = possq(&["run", "--config", "/definitely/not/here.ini"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/definitely/not/here.ini"));
}

#[test]
fn unknown_key_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[scenario]\nscans = 10\n\nspeed_of_light = 3\n").unwrap();
    let o = possq(&["crlb", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("speed_of_light"), "{msg}");
    assert!(msg.contains("line 4"), "{msg}");

    let o = possq(&["crlb", "--set", "scenario.scans=ten"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.scans"));
}

fn table1(dir: &Path) -> Output {
    let d = dir_arg(dir);
    possq(&[
        "table1",
        "--set",
        &d,
        "--set",
        "experiment.runs=1",
        "--set",
        "experiment.particle_counts=100,200",
        "--set",
        "scenario.scans=6",
    ])
}

#[test]
fn table1_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = table1(dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t = rows(&dir.path().join("table1.csv"));
    assert_eq!(t.len(), 16);
    for r in &t {
        let pct: f64 = r[4].parse().unwrap();
        assert!(pct == 0.0 || pct == 100.0, "{r:?}");
    }
}

#[test]
fn table1_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(table1(a.path()).status.success());
    assert!(table1(b.path()).status.success());
    assert_eq!(
        fs::read(a.path().join("table1.csv")).unwrap(),
        fs::read(b.path().join("table1.csv")).unwrap()
    );
}

#[test]
fn crlb_starts_at_the_prior_and_shrinks_after_the_turn() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir_arg(dir.path());
    let o = possq(&[
        "crlb",
        "--set",
        &d,
        "--set",
        "filter.prior_range_km=8",
        "--set",
        "filter.prior_range_sigma_km=2",
        "--set",
        "filter.sigma_deg=2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let b: Vec<f64> = rows(&dir.path().join("crlb.csv"))
        .iter()
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(b.len(), 30);
    assert!(b.iter().all(|v| v.is_finite() && *v > 0.0));
    // position block of the prior: range variance plus cross-range variance
    let cross = 8_000.0 * 2f64.to_radians();
    let expected = (2_000f64.powi(2) + cross * cross).sqrt();
    assert!(
        (b[0] - expected).abs() <= 1e-9 * expected,
        "{} vs {expected}",
        b[0]
    );
    assert!(b[29] < b[14]);
}
