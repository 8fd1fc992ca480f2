use std::path::Path;
use std::process::{Command, Output};

fn morphfab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphfab")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn run_exports_blueprint_and_exit_codes_follow_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for fixture in ["tripod", "thin-limb"] {
        assert!(morphfab(&["generate", fixture, "-o", "specs"], d).status.success());
    }
    let ok = morphfab(&["run", "specs/tripod.vmorph", "-o", "tripod_out"], d);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let stl = std::fs::read_dir(d.join("tripod_out")).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "stl")
    });
    assert_eq!(stl.count(), 5);
    assert!(d.join("tripod_out/report.json").exists());
    assert!(d.join("tripod_out/scores.csv").exists());

    let failed = morphfab(&["run", "specs/thin_limb.vmorph", "-o", "thin_out"], d);
    assert_eq!(failed.status.code(), Some(2));
    assert!(d.join("thin_out/report.json").exists());

    let scored = morphfab(&["score", "specs/tripod.vmorph"], d);
    assert_eq!(scored.status.code(), Some(0));
    let scores: serde_json::Value = serde_json::from_slice(&scored.stdout).unwrap();
    assert!(scores["s_mfg"].as_f64().unwrap() > 0.0);
}

#[test]
fn invalid_input_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.vmorph"), "{}").unwrap();
    assert_eq!(morphfab(&["run", "bad.vmorph"], d).status.code(), Some(3));
    assert_eq!(morphfab(&["run", "missing.vmorph"], d).status.code(), Some(3));
    std::fs::write(d.join("bad.json"), r#"{"wire": {"radius": -1}}"#).unwrap();
    assert!(morphfab(&["generate", "tripod", "-o", "t.vmorph"], d).status.success());
    assert_eq!(morphfab(&["run", "t.vmorph", "-c", "bad.json"], d).status.code(), Some(3));
    std::fs::create_dir(d.join("empty")).unwrap();
    assert_eq!(morphfab(&["batch", "empty"], d).status.code(), Some(3));
}

#[test]
fn config_init_round_trips_and_batch_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(morphfab(&["config", "init", "-o", "config.json"], d).status.success());
    assert!(morphfab(&["generate", "procedural", "--count", "4", "--dim", "48", "-o", "designs"], d).status.success());
    assert!(morphfab(&["generate", "ring", "-o", "designs"], d).status.success());
    let out = morphfab(&["batch", "designs", "-c", "config.json", "--jobs", "2", "-o", "batch"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("batch/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n_tot"], 5);
    assert!(summary["n_invalid_tree"].as_u64().unwrap() >= 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("pass-through"));
}
