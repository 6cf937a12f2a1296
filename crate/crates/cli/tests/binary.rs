use std::fs;
use std::process::Command;

fn hypequil() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypequil"))
}

const CONFIG: &str = r#"{
  "dimension": 2,
  "region": {"type": "ball", "center": [1, 0, 0], "radius": 2},
  "bifunction": {"type": "zero"},
  "task": "verify",
  "point": [1.1276259652063807, 0.5210953054937474, 0]
}"#;

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, CONFIG).unwrap();
    let out = tmp.path().join("run");
    let status = hypequil()
        .args(["resolve", "--config"])
        .arg(&cfg)
        .args(["--seed", "9", "--plot", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["task"], "resolve");
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["solver"]["seed"], 9);
    assert!(out.join("plot.svg").exists());
}

#[test]
fn config_errors_exit_with_status_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, CONFIG.replace("\"radius\": 2", "\"radius\": -1")).unwrap();
    let out = hypequil().args(["resolve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("region.radius"), "{err}");

    let missing = hypequil().args(["resolve", "--config"]).arg(tmp.path().join("none.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_task_is_a_usage_error() {
    let out = hypequil().args(["solve", "--config", "x.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown task"));
}
