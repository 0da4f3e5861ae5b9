//! End-to-end checks of the binary: flags, exit codes and file outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn meta_csv(dir: &Path) -> PathBuf {
    let path = dir.join("meta.csv");
    let mut text = String::from("DMU,X,Y\n");
    let x = [
        2.0, 3.0, 5.0, 4.64, 6.4, 11.0, 9.4, 8.4, 5.4, 4.0, 5.44, 5.7, 8.26, 6.76, 9.0, 10.0, 12.0,
        10.76, 12.98, 13.56, 10.4, 11.64, 10.68,
    ];
    let y = [
        1.0, 3.0, 4.0, 0.69, 2.41, 2.0, 3.37, 1.41, 9.81, 8.29, 6.57, 8.69, 8.63, 7.63, 9.0, 11.0,
        12.0, 9.73, 9.27, 6.83, 7.25, 4.27, 2.5,
    ];
    for (i, name) in (b'A'..=b'W').enumerate() {
        text.push_str(&format!("{},{},{}\n", name as char, x[i], y[i]));
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn dea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dea"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn basic_vrs_json_reproduces_published_score() {
    let dir = tempfile::tempdir().unwrap();
    let data = meta_csv(dir.path());
    let out_path = dir.path().join("res");
    let out = dea(&[
        "--data",
        data.to_str().unwrap(),
        "--model",
        "basic",
        "--rts",
        "vrs",
        "--orientation",
        "io",
        "--ni",
        "1",
        "--no",
        "1",
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(out_path.with_extension("json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let d = value["dmus"]["D"]["efficiency"].as_f64().unwrap();
    assert!((d - 0.43103).abs() < 1e-4, "D scored {d}");
    assert_eq!(value["schema_version"], 1);
}

#[test]
fn emit_lp_prints_programs_without_scores() {
    let dir = tempfile::tempdir().unwrap();
    let data = meta_csv(dir.path());
    let out = dea(&[
        "--data",
        data.to_str().unwrap(),
        "--model",
        "basic",
        "--ni",
        "1",
        "--no",
        "1",
        "--emit-lp",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("minimize"));
    assert!(text.contains("subject to"));
    assert!(!text.contains("model: basic"));
    // One program per DMU.
    assert_eq!(text.matches("# ").count(), 23);
}

#[test]
fn metafrontier_csv_matches_published_minima() {
    let dir = tempfile::tempdir().unwrap();
    let data = meta_csv(dir.path());
    let out_path = dir.path().join("meta_scores");
    let out = dea(&[
        "--data",
        data.to_str().unwrap(),
        "--model",
        "metafrontier",
        "--rts",
        "vrs",
        "--ni",
        "1",
        "--no",
        "1",
        "--groups",
        "G1=1-8;G2=9-14;G3=15-23",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_path.with_extension("csv")).unwrap();
    let expected = [
        ("A", 1.00000),
        ("C", 0.80000),
        ("T", 0.29499),
        ("W", 0.25749),
    ];
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        for (dmu, want) in expected {
            if cells[0] == dmu {
                let nonconcave: f64 = cells[4].parse().unwrap();
                assert!((nonconcave - want).abs() < 1e-4, "{dmu}: {nonconcave}");
            }
        }
    }
}

#[test]
fn unknown_flag_and_model_exit_2() {
    let out = dea(&[
        "--data", "x.csv", "--model", "nope", "--ni", "1", "--no", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = dea(&["--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_3_and_bad_cells_exit_2() {
    let out = dea(&[
        "--data",
        "/nonexistent/nowhere.csv",
        "--model",
        "basic",
        "--ni",
        "1",
        "--no",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "DMU,X,Y\nA,abc,1\n").unwrap();
    let out = dea(&[
        "--data",
        path.to_str().unwrap(),
        "--model",
        "basic",
        "--ni",
        "1",
        "--no",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-numeric"));
}

#[test]
fn na_results_still_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.csv");
    std::fs::write(&path, "DMU,X,Y\nA,1,1\nB,2,2\n").unwrap();
    // VRS output-oriented super-efficiency of the minimum-input DMU is
    // infeasible; the run must still succeed.
    let out = dea(&[
        "--data",
        path.to_str().unwrap(),
        "--model",
        "supereff",
        "--orientation",
        "oo",
        "--rts",
        "vrs",
        "--ni",
        "1",
        "--no",
        "1",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("A\tNA"));
}

#[test]
fn emit_dot_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let data = meta_csv(dir.path());
    let args = [
        "--data",
        data.to_str().unwrap(),
        "--model",
        "basic",
        "--ni",
        "1",
        "--no",
        "1",
        "--emit-dot",
    ];
    let a = dea(&args);
    let b = dea(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("digraph references"));
}

#[test]
fn kaoliu_runs_from_fuzzy_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fuzzy.csv");
    std::fs::write(&path, "DMU,x,xd,y\nA,2,1,2\nB,4,1,2\n").unwrap();
    let out = dea(&[
        "--data",
        path.to_str().unwrap(),
        "--model",
        "kaoliu",
        "--kaoliu-model",
        "basic",
        "--inputs-ml",
        "2",
        "--inputs-dl",
        "3",
        "--inputs-dr",
        "3",
        "--outputs-ml",
        "4",
        "--alpha",
        "0,1",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    // Worst case of B at alpha 0: B at x=5 against A at x=1.
    assert!(text.contains("B\t0\t0.2\t1"), "got: {text}");
}

#[test]
fn malmquist_long_panel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("panel.csv");
    std::fs::write(&path, "DMU,t,x,y\nA,1,2,2\nB,1,4,2\nA,2,2,2.5\nB,2,4,3\n").unwrap();
    let out = dea(&[
        "--data",
        path.to_str().unwrap(),
        "--model",
        "malmquist",
        "--arrangement",
        "vertical",
        "--percol",
        "2",
        "--ni",
        "1",
        "--no",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("A\t1->2\t1.25"), "got: {text}");
    assert!(text.contains("B\t1->2\t1.5"), "got: {text}");
}

#[test]
fn bootstrap_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = meta_csv(dir.path());
    let args = [
        "--data",
        data.to_str().unwrap(),
        "--model",
        "bootstrap",
        "--rts",
        "vrs",
        "--ni",
        "1",
        "--no",
        "1",
        "--b",
        "20",
        "--seed",
        "7",
    ];
    let a = dea(&args);
    let b = dea(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn maxfr_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m1.csv");
    std::fs::write(&path, "DMU,x,y\nA,2,2\nB,4,2\nC,5,4\nD,8,2\n").unwrap();
    let facets_path = dir.path().join("facets.json");
    let out = dea(&[
        "--data",
        path.to_str().unwrap(),
        "--model",
        "addmin",
        "--rts",
        "vrs",
        "--ni",
        "1",
        "--no",
        "1",
        "--maxfr-out",
        facets_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let facets: Vec<Vec<String>> =
        serde_json::from_str(&std::fs::read_to_string(&facets_path).unwrap()).unwrap();
    assert_eq!(facets, vec![vec!["A".to_string(), "C".to_string()]]);

    let rerun = dea(&[
        "--data",
        path.to_str().unwrap(),
        "--model",
        "addmin",
        "--rts",
        "vrs",
        "--ni",
        "1",
        "--no",
        "1",
        "--maxfr-in",
        facets_path.to_str().unwrap(),
    ]);
    assert!(rerun.status.success());
    assert!(stdout(&rerun).contains("D\t5"), "got: {}", stdout(&rerun));
}
