use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("eigen-cache")
}

fn strata(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

/// Equivalence on a small line grid; `extra` is spliced into the top-level object.
fn equivalence_config(extra: &str) -> String {
    format!(
        r#"{{"group": {{"id": "r1"}}, "grid": {{"half_widths": [32], "points": [1025]}},
            "profiles": [{{"xi_center": 16}}, {{"xi_center": 27.2}}], "declared_k": 2, "j_max": 4,
            "params": {{"s": [-1, 0, 1], "p": [1, 2, "inf"], "q": [1, 2, "inf"]}},
            "cache_dir": {:?}{extra}}}"#,
        cache_dir().display().to_string()
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn group_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.json", r#"{"group": {"id": "heisenberg"}, "samples": 64}"#);
    let out = dir.path().join("out");
    let o = strata(&["group-check"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["suite"], "group-check");
    assert_eq!(summary["pass"], true);
    assert!(out.join("group-check-checks.csv").exists());
    assert!(out.join("group-check-summary.json").exists());
}

#[test]
fn structure_file_resolves_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "engel.json",
        r#"{"dim": 4, "layers": [1, 1, 2, 3], "brackets": [[1, 2, 3, 1], [1, 3, 4, 1]]}"#,
    );
    let cfg = write_config(dir.path(), "cfg.json", r#"{"group": {"structure": "engel.json"}, "samples": 32}"#);
    let o = strata(&["group-check", "--jobs", "1"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn jacobi_violation_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "bad.json",
        r#"{"dim": 7, "layers": [1, 1, 1, 2, 2, 2, 3],
            "brackets": [[1, 2, 4, 1], [2, 3, 5, 1], [3, 1, 6, 1], [1, 5, 7, 1]]}"#,
    );
    let cfg = write_config(dir.path(), "cfg.json", r#"{"group": {"structure": "bad.json"}}"#);
    let o = strata(&["group-check"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Jacobi identity fails for indices (1, 2, 3)"), "{err}");
}

#[test]
fn invalid_configurations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        // s at the declared moment order
        r#"{"group": {"id": "r1"}, "declared_k": 1, "params": [{"s": 1, "p": 2, "q": 2}]}"#,
        // p below one
        r#"{"group": {"id": "r1"}, "declared_k": 2, "params": [{"s": 0, "p": 0.5, "q": 2}]}"#,
        r#"{"group": {"id": "nope"}}"#,
        r#"{"group": {"id": "r1"}, "unknown_field": 1}"#,
        r#"{"group": {"id": "r1"}"#,
        r#"{"group": {"id": "r1"}, "grid": {"half_widths": [4], "points": [10]}, "kernel": {"ghat": "one"}}"#,
    ];
    for (i, json) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.json"), json);
        let o = strata(&["kernel"], &cfg, &out);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = strata(&["kernel"], &dir.path().join("missing.json"), &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_suite_writes_the_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "k.json",
        r#"{"group": {"id": "r1"}, "grid": {"half_widths": [16], "points": [513]}, "kernel": {"ghat": "heat", "t": 0.5}}"#,
    );
    let out = dir.path().join("out");
    let o = strata(&["kernel", "--no-cache"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = read_dir_sorted(&out).into_iter().map(|f| f.0).collect();
    assert!(names.iter().any(|n| n.ends_with(".bin")), "{names:?}");
    let checks = fs::read_to_string(out.join("kernel-checks.csv")).unwrap();
    assert!(checks.starts_with("case,status,value,bound,provenance\n"));
    assert!(!checks.contains("FAIL"));
}

#[test]
fn failing_check_exits_with_one_and_reports_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &equivalence_config(r#", "tolerances": {"spread": 1.01}"#));
    let out = dir.path().join("out");
    let o = strata(&["equivalence"], &cfg, &out);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["pass"], false);
    assert_eq!(summary["worst_case"]["bound"], 1.01);

    let mut rows = csv_rows(&out.join("equivalence-checks.csv"));
    let header = rows.remove(0);
    assert_eq!(header, ["case", "status", "value", "bound", "provenance"]);
    let fails: Vec<_> = rows.iter().filter(|r| r[1] == "FAIL").collect();
    assert!(!fails.is_empty());
    for r in fails {
        let value: f64 = r[2].parse().unwrap();
        let bound: f64 = r[3].parse().unwrap();
        assert!(value > bound);
        assert_eq!(bound, 1.01);
        assert!(!r[4].is_empty());
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &equivalence_config(""));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = strata(&["equivalence"], &cfg, &a);
    let second = strata(&["equivalence", "--jobs", "1"], &cfg, &b);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
    assert!(fa.len() >= 4);
    assert_eq!(fa, fb);
}
