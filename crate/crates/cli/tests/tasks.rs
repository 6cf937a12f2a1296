use std::fs;
use std::path::Path;

use hypequil_cli::run::{
    CONFIG_FILE, ERROR_MARKER, MERIT_TABLE_FILE, ORACLE_FILE, PLOT_FILE, RESOLVENT_FILE, TRACE_FILE, VERDICTS_FILE,
};
use hypequil_cli::{parse_config, run_task, ExperimentConfig};
use serde_json::Value;

const X: &str = "[1.1276259652063807, 0.5210953054937474, 0]";
const FAR: &str = "[6.769005806608012, 4.664264860804576, -4.802506940979541]";
const COSH_SUM: &str = r#"{"type": "objective-diff", "terms": [
  {"w": 0.7, "anchor": [1.3374349463048447, 0.8484400509945718, 0.2624532633932583]},
  {"w": 0.5, "anchor": [1.8106555673243747, -1.209295327803283, 0.9033705738155873]}]}"#;

fn config(dir: &Path, task: &str, bifunction: &str, point: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{"dimension": 2, "region": {{"type": "ball", "center": [1, 0, 0], "radius": 2}},
            "bifunction": {bifunction}, "task": "{task}", "point": {point},
            "output": {} {extra}}}"#,
        serde_json::to_string(dir).unwrap()
    );
    parse_config(&text).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn resolve_zero_bifunction_returns_x() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "resolve", r#"{"type": "zero"}"#, X, "");
    let report = run_task(&cfg).unwrap();
    assert!(report.passed);
    let out = read_json(&tmp.path().join(RESOLVENT_FILE));
    assert_eq!(out["z"], out["x"]);
    assert_eq!(out["solver"], "descent");
    let echoed = parse_config(&fs::read_to_string(tmp.path().join(CONFIG_FILE)).unwrap()).unwrap();
    assert_eq!(echoed, cfg);
    assert!(!tmp.path().join(PLOT_FILE).exists());
}

#[test]
fn ppa_writes_trace_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "ppa", COSH_SUM, FAR, r#", "plot": true, "ppa": {"max_steps": 40}"#);
    run_task(&cfg).unwrap();
    let csv = fs::read_to_string(tmp.path().join(TRACE_FILE)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,coord_0,coord_1,coord_2,step_distance,residual,lambda,micros"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 1 && rows.len() <= 40);
    // Converged: the last step moved less than the default stop tolerance.
    assert!(rows.last().unwrap()[4] < 1e-10);
    let svg = fs::read_to_string(tmp.path().join(PLOT_FILE)).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn grid_oracle_writes_point_and_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "grid-oracle", COSH_SUM, FAR, r#", "solver": {"grid_spacing": 0.2}"#);
    run_task(&cfg).unwrap();
    let oracle = read_json(&tmp.path().join(ORACLE_FILE));
    let n = oracle["grid_points"].as_u64().unwrap() as usize;
    let table = fs::read_to_string(tmp.path().join(MERIT_TABLE_FILE)).unwrap();
    assert_eq!(table.lines().count(), n + 1);
    // The oracle point is the grid point of least merit.
    let best = table
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(best, oracle["merit"].as_f64().unwrap());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let gain = COSH_SUM
        .replace("objective-diff", "gain-weighted")
        .replace("\"terms\"", "\"gain\": 0.5, \"terms\"");
    let extra = r#", "plot": true, "seed": 5, "solver": {"grid_spacing": 0.2}"#;
    let names = [CONFIG_FILE, RESOLVENT_FILE, TRACE_FILE, ORACLE_FILE, MERIT_TABLE_FILE, PLOT_FILE];
    for task in ["resolve", "ppa", "grid-oracle"] {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config(tmp.path(), task, &gain, FAR, extra);
        let snapshot = || {
            run_task(&cfg).unwrap();
            names.map(|n| fs::read(tmp.path().join(n)).ok())
        };
        let first = snapshot();
        assert!(first.iter().filter(|f| f.is_some()).count() >= 3, "{task}");
        let second = snapshot();
        for (name, (a, b)) in names.iter().zip(first.iter().zip(&second)) {
            assert!(a == b, "{task}: {name} differs between runs");
        }
    }
}

#[test]
fn failing_solve_leaves_partial_output_and_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "ppa", r#"{"type": "neg-squared-distance"}"#, X, "");
    assert!(run_task(&cfg).is_err());
    assert!(tmp.path().join(TRACE_FILE).exists());
    let marker = fs::read_to_string(tmp.path().join(ERROR_MARKER)).unwrap();
    assert!(marker.contains("inner solve failed"), "{marker}");

    // A later successful run clears the marker.
    let cfg = config(tmp.path(), "resolve", r#"{"type": "zero"}"#, X, "");
    run_task(&cfg).unwrap();
    assert!(!tmp.path().join(ERROR_MARKER).exists());
}

#[test]
fn verify_writes_one_verdict_per_line() {
    let tmp = tempfile::tempdir().unwrap();
    let small = r#", "harness": {"stewart_trials": 100, "convexity_trials": 100, "instances": 1,
        "nonspreading_pairs": 2, "kkm_families": 2, "ppa_steps": 30}"#;
    let cfg = config(tmp.path(), "verify", r#"{"type": "zero"}"#, X, small);
    let report = run_task(&cfg).unwrap();
    assert!(report.passed);
    let text = fs::read_to_string(tmp.path().join(VERDICTS_FILE)).unwrap();
    let verdicts: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(verdicts.len() > 10);
    assert!(verdicts.iter().all(|v| v["pass"] == true));
    assert_eq!(verdicts[0]["name"], "stewart");
}
