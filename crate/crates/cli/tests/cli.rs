use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenes")
        .join(name)
}

fn magbump(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magbump"))
        .args(args)
        .output()
        .unwrap()
}

fn run_in(dir: &Path, scene_file: &Path, rest: &[&str]) -> (i32, Value) {
    let mut args = vec![
        "--scene",
        scene_file.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(rest);
    let out = magbump(&args);
    let code = out.status.code().unwrap();
    const COMMANDS: [&str; 8] = [
        "simulate",
        "degree",
        "cone-check",
        "find-orbit",
        "alpha-min",
        "classify",
        "sweep",
        "check",
    ];
    let cmd = rest.iter().find(|a| COMMANDS.contains(a)).unwrap();
    let report = fs::read_to_string(dir.join(format!("{cmd}.json")))
        .map(|s| serde_json::from_str(&s).unwrap())
        .unwrap_or(Value::Null);
    (code, report)
}

#[test]
fn very_strong_triangle_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_in(dir.path(), &scene("triangle.toml"), &["check"]);
    assert_eq!(code, 0, "{report:#}");
    let checks = report["result"]["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"] == "cone field" && c["status"] == "pass"));
    assert!(report["result"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn weak_disk_reports_degree_zero_and_skips_cone() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_in(dir.path(), &scene("weak_disk.toml"), &["check"]);
    assert_eq!(code, 0);
    let checks = report["result"]["checks"].as_array().unwrap();
    let degree = checks
        .iter()
        .find(|c| c["name"] == "degree bump 1")
        .unwrap();
    assert!(degree["detail"]
        .as_str()
        .unwrap()
        .contains("[0, 0, 0, 0, 0, 0, 0, 0]"));
    let cone = checks.iter().find(|c| c["name"] == "cone field").unwrap();
    assert_eq!(cone["status"], "skipped");
}

#[test]
fn malformed_scene_is_a_usage_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[[bump]]\nkind = \"disk\"\ncenter = [0.0, 0.0\n").unwrap();
    let out = magbump(&["--scene", bad.to_str().unwrap(), "classify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_two() {
    let s = scene("triangle.toml");
    let s = s.to_str().unwrap();
    assert_eq!(magbump(&["classify"]).status.code(), Some(2));
    assert_eq!(
        magbump(&["--scene", s, "--tolerance", "foo=1", "classify"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        magbump(&["--scene", s, "--tolerance", "det=-1", "classify"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(magbump(&["--scene", s, "nonsense"]).status.code(), Some(2));
    assert_eq!(
        magbump(&["--scene", s, "find-orbit", "--word", "1,1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn tolerance_overrides_recorded_in_header() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_in(
        dir.path(),
        &scene("triangle.toml"),
        &[
            "--tolerance",
            "residual=1e-11",
            "--tolerance",
            "det=1e-9",
            "classify",
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(report["tolerances"]["residual"], 1e-11);
    assert_eq!(report["tolerances"]["det"], 1e-9);
    assert_eq!(report["tolerances"]["agreement"], 1e-6);
    assert_eq!(report["command"], "classify");
}

#[test]
fn simulate_outputs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let (code, _) = run_in(
            d.path(),
            &scene("strong_disk.toml"),
            &["--format", "json,csv,svg", "simulate", "--beam", "0,15"],
        );
        assert_eq!(code, 0);
    }
    for ext in ["json", "csv", "svg"] {
        let x = fs::read(a.path().join(format!("simulate.{ext}"))).unwrap();
        let y = fs::read(b.path().join(format!("simulate.{ext}"))).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{ext}");
    }
}

#[test]
fn empty_scene_gives_one_straight_escape() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_in(
        dir.path(),
        &scene("empty.toml"),
        &["--format", "json,svg", "simulate", "--line", "0.5,-2"],
    );
    assert_eq!(code, 0);
    let orbits = report["result"]["orbits"].as_array().unwrap();
    assert_eq!(orbits.len(), 1);
    assert_eq!(orbits[0]["termination"], "escaped");
    assert_eq!(orbits[0]["events"], 0);
    let svg = fs::read_to_string(dir.path().join("simulate.svg")).unwrap();
    let path = svg.lines().find(|l| l.starts_with("<path")).unwrap();
    assert_eq!(path.matches('M').count(), 1);
    assert_eq!(path.matches('L').count(), 1);
    assert!(!path.contains('A'));
}

#[test]
fn periodic_orbit_report_has_monodromy() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_in(
        dir.path(),
        &scene("triangle.toml"),
        &["--format", "json,svg", "find-orbit", "--word", "1,2,3"],
    );
    assert_eq!(code, 0);
    let r = &report["result"];
    assert_eq!(r["states"].as_array().unwrap().len(), 3);
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
    assert!(r["monodromy"]["trace"].as_f64().unwrap().abs() > 2.0);
    assert!((r["monodromy"]["det"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!(fs::read_to_string(dir.path().join("find-orbit.svg"))
        .unwrap()
        .contains(" A"));
}

#[test]
fn cone_check_outside_hypotheses_is_reported_only() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(scene("triangle.toml"))
        .unwrap()
        .replace("b = 10.0", "b = 1.05");
    let path = dir.path().join("soft.toml");
    fs::write(&path, src).unwrap();
    let (code, report) = run_in(dir.path(), &path, &["--samples", "300", "cone-check"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["asserted"], false);
    assert_eq!(report["result"]["very_strong"], false);
}

#[test]
fn collinear_scene_rejected_by_alpha_min() {
    let dir = tempfile::tempdir().unwrap();
    let mut src = String::new();
    for x in [0.0, 4.0, 8.0] {
        src +=
            &format!("[[bump]]\nkind = \"disk\"\ncenter = [{x:?}, 0.0]\nradius = 1.0\nb = 5.0\n\n");
    }
    let path = dir.path().join("line.toml");
    fs::write(&path, src).unwrap();
    let out = magbump(&[
        "--scene",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "alpha-min",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("straight line"));
}

#[test]
fn sweep_shows_weak_to_strong_transition() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run_in(
        dir.path(),
        &scene("strong_disk.toml"),
        &[
            "--format", "json,csv", "sweep", "--from", "0.5", "--to", "2.5", "--steps", "5",
            "--points", "400",
        ],
    );
    assert_eq!(code, 0);
    let rows = report["result"]["rows"].as_array().unwrap();
    let summary: Vec<(String, Value)> = rows
        .iter()
        .map(|r| {
            (
                r["regime"].as_str().unwrap().to_string(),
                r["degree"].clone(),
            )
        })
        .collect();
    assert_eq!(summary[0], ("weak".into(), Value::from(0)));
    assert_eq!(summary[1].0, "neither");
    assert_eq!(summary[4], ("strong".into(), Value::from(1)));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn segment_word_needs_directions() {
    let s = scene("triangle.toml");
    let out = magbump(&[
        "--scene",
        s.to_str().unwrap(),
        "find-orbit",
        "--word",
        "1,2",
        "--segment",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
