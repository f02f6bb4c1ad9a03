//! Command-line behaviour: outputs and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracvis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracvis"))
        .arg("--quiet")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate_koch(dir: &Path) -> std::path::PathBuf {
    let curve = dir.join("koch.json");
    let o = fracvis(&[
        "generate",
        "--kind",
        "koch",
        "--target-dim",
        "1.5",
        "--level",
        "4",
        "--out",
        path(&curve),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    curve
}

#[test]
fn generate_visible_and_dim() {
    let dir = tempfile::tempdir().unwrap();
    let curve = generate_koch(dir.path());
    let text = fs::read_to_string(&curve).unwrap();
    assert!(text.contains("\"segments\""));

    let vis = dir.path().join("vis.json");
    let o = fracvis(&[
        "visible",
        "--curve",
        path(&curve),
        "--x",
        "0.5",
        "--y",
        "-0.5",
        "--out",
        path(&vis),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&vis).unwrap()).unwrap();
    assert!(v["total_length"].as_f64().unwrap() > 0.0);

    let o = fracvis(&["dim", "--curve", path(&curve), "--window", "0.01", "0.25"]);
    assert_eq!(code(&o), 0);
    let est: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = est["value"].as_f64().unwrap();
    assert!(d > 1.2 && d < 1.8, "{d}");
}

#[test]
fn generate_is_deterministic() {
    let a = fracvis(&[
        "generate",
        "--kind",
        "quasicircle",
        "--level",
        "6",
        "--params",
        "0.5",
        "--seed",
        "3",
    ]);
    let b = fracvis(&[
        "generate",
        "--kind",
        "quasicircle",
        "--level",
        "6",
        "--params",
        "0.5",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn constants_prints_the_bound() {
    let o = fracvis(&["constants", "--d", "1.5", "--s", "1.2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["bound_value"].as_f64().unwrap() - 1.366).abs() < 5e-4);
}

#[test]
fn sweep_verify_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"curve": {"kind": "koch", "target_dim": 1.3, "level": 5},
            "viewpoints": {"mode": "ring", "count": 6},
            "samples_per_visible": 4000}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = fracvis(&[
        "sweep",
        "--config",
        path(&config),
        "--out",
        path(&out),
        "--seed",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let results = out.join("results.csv");
    let report = out.join("report.json");

    let o = fracvis(&[
        "verify-bound",
        "--results",
        path(&results),
        "--report",
        path(&report),
    ]);
    assert_eq!(code(&o), 0);
    let again: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let orig: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(again["fraction_within"], orig["fraction_within"]);
    assert_eq!(again["n_viewpoints"], 6);

    let fig = dir.path().join("fig");
    let o = fracvis(&[
        "render",
        "--results",
        path(&results),
        "--report",
        path(&report),
        "--out",
        path(&fig),
    ]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(fig.join("scatter.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let curve = generate_koch(dir.path());
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "generate",
            "--kind",
            "koch",
            "--target-dim",
            "2.5",
            "--level",
            "3",
        ],
        vec!["generate", "--kind", "nonsense"],
        vec!["constants", "--d", "0.5", "--s", "1.2"],
        vec!["visible", "--curve", path(&curve), "--x", "0", "--y", "0"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = fracvis(&args);
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = fracvis(&["visible", "--curve", path(&missing), "--x", "1", "--y", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(code(&fracvis(&["--help"])), 0);
}
