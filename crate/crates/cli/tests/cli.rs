use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntk-spectra")).args(args).output().unwrap()
}

fn cli_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntk-spectra")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_out(args: &[&str]) -> Value {
    let o = cli(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn kernel_eval_prints_one_over_pi() {
    let o = cli(&["kernel-eval", "--family", "nt", "--s", "1", "--u", "0", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "u,value\r\n0,0.3183098861837907\r\n");
}

#[test]
fn rf_is_normalized_at_one() {
    let o = cli(&["kernel-eval", "--family", "rf", "--s", "2", "--u", "1", "--format", "csv"]);
    assert_eq!(stdout(&o), "u,value\r\n1,1\r\n");
}

#[test]
fn unsupported_smoothness_exits_with_two() {
    let o = cli(&["kernel-eval", "--family", "rf", "--s", "5", "--u", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("unsupported smoothness"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(cli(&["kernel-eval", "--family", "cnn"]).status.code(), Some(2));
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cli(&["kernel-eval", "--u", "1.5"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    // All odd degrees of the two-layer NT kernel with s = 1 vanish, so the
    // fit has nothing to work with.
    let o = cli(&["eigendecay", "--family", "nt", "--s", "1", "--parity", "odd"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_embeds_config_and_version() {
    let doc = json_out(&["spectrum", "--family", "rf", "--s", "1", "--d", "4", "--max-degree", "12"]);
    assert_eq!(doc["command"], "spectrum");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["d"], 4);
    assert_eq!(doc["config"]["family"], "rf");
    assert_eq!(doc["config"]["l"], 2);
    assert_eq!(doc["payload"]["degrees"].as_array().unwrap().len(), 13);
    assert!(doc["meta"]["timestamp"].is_string());
}

#[test]
fn eigendecay_reports_the_dominant_parity_slope() {
    let doc = json_out(&["eigendecay", "--family", "nt", "--s", "1", "--d", "3", "--max-degree", "60", "--parity", "even"]);
    let slope = doc["payload"]["fit"]["slope"].as_f64().unwrap();
    assert!((-3.3..=-2.7).contains(&slope), "{slope}");
    assert_eq!(doc["config"]["degree_min"], 9);
    assert_eq!(doc["config"]["degree_max"], 59);
}

#[test]
fn matern_ratio_is_bounded_on_the_live_parity() {
    let doc = json_out(&["matern-compare", "--s", "1", "--d", "3", "--nu", "0.5", "--parity", "even"]);
    let spread = doc["payload"]["spread"].as_f64().unwrap();
    assert!(spread < 20.0, "{spread}");
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"family": "rf", "s": 2, "max_degree": 10}"#).unwrap();
    let path = cfg.to_str().unwrap();
    let doc = json_out(&["spectrum", "--config", path]);
    assert_eq!(doc["config"]["family"], "rf");
    assert_eq!(doc["config"]["s"], 2);
    let doc = json_out(&["spectrum", "--config", path, "--s", "3"]);
    assert_eq!(doc["config"]["s"], 3);
    assert_eq!(doc["config"]["max_degree"], 10);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"famliy": "rf"}"#).unwrap();
    let o = cli(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_round_trips_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample-greedy", "--family", "rf", "--s", "2", "--d", "4", "--n", "20", "--candidates", "300", "--seed", "9"];
    let o = cli_in(dir.path(), &[&args[..], &["--out", "first.json"]].concat());
    assert!(o.status.success());
    let o = cli_in(dir.path(), &["sample-greedy", "--config", "first.json", "--out", "second.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let read = |name: &str| -> Value { serde_json::from_slice(&std::fs::read(dir.path().join(name)).unwrap()).unwrap() };
    let (a, b) = (read("first.json"), read("second.json"));
    assert_eq!(a["config"], b["config"]);
    assert_eq!(serde_json::to_string(&a["payload"]).unwrap(), serde_json::to_string(&b["payload"]).unwrap());
    // A report from another command is not a valid config here.
    let o = cli_in(dir.path(), &["spectrum", "--config", "first.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_output_writes_a_meta_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gain.csv");
    let o = cli(&["infogain", "--n-grid", "8,16", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("n,info_gain,effective_dim,lambda\r\n"));
    assert_eq!(csv.lines().count(), 3);
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("gain.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "infogain");
    assert_eq!(meta["config"]["n_grid"], serde_json::json!([8, 16]));
    assert!(meta.get("payload").is_none());
}

#[test]
fn plot_data_for_growth_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mig.json");
    let args = ["mig-growth", "--max-exponent", "6", "--candidates", "256", "--emit-plot-data", "--out", out.to_str().unwrap()];
    assert!(cli(&args).status.success());
    let plot = std::fs::read_to_string(dir.path().join("mig.json.plot.csv")).unwrap();
    assert!(plot.starts_with("family,s,d,lambda,n,info_gain,theoretical_exponent\r\n"));
    assert_eq!(plot.lines().count(), 7);
    // Plot data needs a file to sit next to.
    assert_eq!(cli(&["mig-growth", "--max-exponent", "6", "--emit-plot-data"]).status.code(), Some(2));
}

#[test]
fn error_rate_csv_columns() {
    let o = cli(&[
        "error-rate", "--family", "rf", "--s", "1", "--d", "3", "--reps", "2", "--max-exponent", "5", "--eval-sample", "500",
        "--format", "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("n,rep,sup_error\r\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 2);
}

#[test]
fn point_pairs_file() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pairs.csv");
    std::fs::write(&pts, "1,0,0,0,1,0\n1,0,0,1,0,0\n").unwrap();
    let o = cli(&["kernel-eval", "--family", "nt", "--s", "1", "--points", pts.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "u,value\r\n0,0.3183098861837907\r\n1,2\r\n");
    std::fs::write(&pts, "1,0,0,0,2,0\n").unwrap();
    let o = cli(&["kernel-eval", "--points", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
