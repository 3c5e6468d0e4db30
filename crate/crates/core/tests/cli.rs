// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqd-thermo"))
        .args(args)
        .output()
        .expect("failed to spawn dqd-thermo")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn sweep_writes_header_and_one_line_per_point() {
    let out = run(&["sweep", "--eps", "6", "--v-points", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "# unit.voltage = mV"));
    assert!(text.lines().any(|l| l.starts_with("# config.beta_h = 0.5")));
    let lines = data_lines(&text);
    assert_eq!(lines[0], "V,eps,I_E_H,I_M_H,J_H,J_C,sigma,eta_norm,phi_norm,zeta,regime");
    assert_eq!(lines.len(), 12);
    let regimes: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(regimes[0], "dud");
    assert_eq!(regimes[1], "engine");
    assert_eq!(regimes[10], "refrigerator");
}

#[test]
fn default_levels_are_concatenated() {
    let out = run(&["sweep", "--v-points", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let eps: Vec<f64> = data_lines(&text)[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eps.len(), 18);
    assert_eq!((eps[0], eps[6], eps[12]), (6.0, 8.0, 10.0));
}

#[test]
fn json_point_report() {
    let out = run(&["point", "--voltage", "1.5", "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["performance"]["regime"], "engine");
    let eta = doc["eta_norm"].as_f64().unwrap();
    assert!(eta > 0.0 && eta < 1.0);
    let p: f64 = doc["populations"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# tight coupling\neps = 6\ntunnel = 1e-4\ncoulomb = 1e-4\nv_points = 6\nformat = json\n").unwrap();
    let dest = dir.path().join("rows.json");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dest.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["kind"], "sweep");
    assert_eq!(doc["metadata"]["config"]["tunnel"], "0.0001");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
    // first point V = 0 has no work and no figure of merit
    assert!(doc["rows"][0]["eta_norm"].is_null());
}

#[test]
fn critical_points_lie_in_the_transition_window() {
    let out = run(&["critical", "--eps", "6", "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let cp = &doc["rows"][0];
    let get = |k: &str| cp[k].as_f64().unwrap();
    assert!(get("V_etamax") < get("V_eta0"));
    assert!(get("V_eta0") < get("V_phi0"));
    assert!(get("V_phi0") < get("V_phimax"));
    assert!(get("eta_max_norm") < 1.0 && get("phi_max_norm") < 1.0);
}

#[test]
fn invalid_input_exits_with_code_two() {
    assert_eq!(run(&["sweep", "--beta-h", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--v-points", "1"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--voltage", "1", "--tunnel", "0", "--delta", "0"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "eps = 6\nwidth = 3\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
}

#[test]
fn no_transition_is_a_numerical_failure() {
    // the voltage window stops before the engine band closes
    let out = run(&["critical", "--eps", "6", "--v-max", "1", "--v-points", "11"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn map_output_does_not_depend_on_thread_count() {
    let args = |threads: &'static str| {
        ["map", "--v-points", "41", "--eps-points", "21", "--threads", threads]
    };
    let one = run(&args("1"));
    let four = run(&args("4"));
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(data_lines(&stdout(&one)).len(), 1 + 41 * 21);
}
