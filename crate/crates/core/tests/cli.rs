use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folner-cli"))
        .args(args)
        .output()
        .unwrap()
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn box_defect_prints_report() {
    let o = cli(&[
        "folner-defect",
        "--model",
        "lattice:2",
        "--F",
        "box:10",
        "--theta",
        "9/10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("9/10"), "{}", stdout(&o));
}

#[test]
fn missed_target_exits_two() {
    let o = cli(&[
        "folner-search",
        "--model",
        "free:2",
        "--theta",
        "3/5",
        "--strategy",
        "balls",
        "--budget",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"model":{"kind":"lattice","params":{"dim":2}},"task":{"defect":{"F":{"box":3},"radius":"0.1.1"}}}"#,
    )
    .unwrap();
    let o = cli(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("task.defect.radius"));
}

#[test]
fn config_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "--config",
        &scenario("f2-paradox-verify.json"),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["certificate.json", "report.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["task"], "paradox-verify");
}

#[test]
fn perturbation_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("build");
    let o = cli(&[
        "perturb",
        "build",
        "--model",
        "circle",
        "--family",
        "0;1/5:4",
        "--family",
        "0;2/5:4",
        "--radius",
        "1/10",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let action = out.join("certificate.json");
    let o = cli(&[
        "perturb",
        "verify",
        "--model",
        "circle",
        "--action",
        action.to_str().unwrap(),
        "--radius",
        "1/10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = cli(&[
        "perturb",
        "verify",
        "--model",
        "circle",
        "--action",
        action.to_str().unwrap(),
        "--radius",
        "1/100",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn paradox_commands() {
    let o = cli(&["paradox", "verify", "--model", "free:2", "--window", "ball:5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("equation,checkable,violations,boundary_defects"));
    let o = cli(&[
        "paradox",
        "search",
        "--model",
        "lattice:1",
        "--window",
        "-3;-2;-1;0;1;2;3",
        "--pool",
        "-1;0;1",
        "--max-pieces",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("pieces,defect,splits,exhaustive"));
}

#[test]
fn suite_over_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["suite", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "id,criterion,passed,measured");
}

#[test]
fn unknown_flag_is_an_error() {
    assert_eq!(cli(&["model", "--bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}
