use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cavent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavent")).args(args).output().unwrap()
}

fn stdout_ok(args: &[&str]) -> String {
    let out = cavent(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn dynamics_csv_starts_from_the_initial_state() {
    let csv = stdout_ok(&["dynamics", "--config", &config("weak_damping.json")]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,c12,cr1r2,c1r1,c2r2,c1r2,c2r1,tangle,abs_e1,abs_e2");
    assert_eq!(lines.next().unwrap(), "0,0.979795897113,0,0,0,0,0,0.96,1,1");
    assert_eq!(csv.lines().count(), 1 + 801);
    assert!(column(&csv, "tangle").iter().all(|&v| v == 0.96));
}

#[test]
fn dynamics_json_carries_absolute_time() {
    let v = json(&["dynamics", "--config", &config("weak_damping.json"), "--format", "json"]);
    let text = v.to_string();
    assert!(text.contains("t_abs"), "{text:.200}");
}

#[test]
fn markovian_events_match_closed_forms() {
    let v = json(&["events", "--config", &config("markovian.json")]);
    let gamma = v["gamma1"].as_f64().unwrap();
    let esd = v["esd_times"][0].as_f64().unwrap() * gamma;
    let esb = v["esb_time"].as_f64().unwrap() * gamma;
    assert!((esd - 1.695522).abs() < 1e-5, "{esd}");
    assert!((esb - 0.202733).abs() < 1e-5, "{esb}");
    assert_eq!(v["regime"], "ESD_TERMINAL");
}

#[test]
fn detuned_weak_damping_has_no_death_in_window() {
    let v = json(&["events", "--config", &config("weak_damping_detuned.json")]);
    assert_eq!(v["regime"], "OSCILLATORY_NO_ESD");
    assert_eq!(v["esd_times"].as_array().unwrap().len(), 0);
}

#[test]
fn negative_s_rules_out_sudden_death() {
    let v = json(&["events", "--initial.s=-0.2"]);
    assert_eq!(v["esd_possible"], false);
    assert_eq!(v["esd_times"].as_array().unwrap().len(), 0);
}

#[test]
fn protocol_reports_design_point() {
    let v = json(&["protocol", "--config", &config("w_state.json")]);
    assert_eq!(v["t_bar"].as_f64().unwrap(), 3.0);
    assert!((v["omega2"].as_f64().unwrap() - 0.396).abs() < 5e-3);
    assert!(v["w_fidelity"].as_f64().unwrap() >= 0.985);
    assert!(v["w_fidelity_joint"].as_f64().unwrap() >= 0.985);
    assert!((v["atom2_ground_probability"].as_f64().unwrap() - 2.0 / 3.0).abs() < 0.02);
}

#[test]
fn swapped_protocol_reports_the_same_numbers() {
    let a = json(&["protocol", "--config", &config("w_state.json")]);
    // The emitter moves to cavity 2, the partner to cavity 1.
    let b = json(&[
        "protocol",
        "--config",
        &config("w_state.json"),
        "--protocol.swapped=true",
        "--cavity1.omega=0.4",
        "--cavity2.omega=1",
    ]);
    for key in ["t_bar", "omega2", "w_fidelity", "w_fidelity_joint", "atom2_ground_probability"] {
        assert_eq!(a[key], b[key], "{key}");
    }
    assert_eq!(b["layout"], "swapped");
}

#[test]
fn zero_threshold_is_a_solver_failure() {
    let out = cavent(&[
        "protocol",
        "--config",
        &config("w_state.json"),
        "--protocol.t_bar=null",
        "--protocol.f_threshold=0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validate_exit_codes() {
    let ok = cavent(&["validate", "--grid.t_max=5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let coarse = cavent(&["validate", "--grid.t_max=5", "--validate.oracle_steps=10"]);
    assert_eq!(coarse.status.code(), Some(4));

    let ideal = cavent(&["validate", "--grid.t_max=5", "--cavity1.lambda=0", "--format", "csv"]);
    assert_eq!(ideal.status.code(), Some(0));
    let text = String::from_utf8(ideal.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("discrete_modes_cavity1,skipped")), "{text}");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(cavent(&["events", "--bogus.key=1"]).status.code(), Some(2));
    assert_eq!(cavent(&["events", "--cavity1.lambda=-1"]).status.code(), Some(2));
    assert_eq!(cavent(&["events", "--dump-state"]).status.code(), Some(2));
    assert_eq!(cavent(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn unreadable_config_is_an_io_error() {
    assert_eq!(cavent(&["events", "--config", "/nonexistent/cfg.json"]).status.code(), Some(5));
}

#[test]
fn unwritable_output_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = cavent(&["dynamics", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn sweep_is_ordered_and_thread_independent() {
    let one = stdout_ok(&["sweep", "--config", &config("opposite_detuning_sweep.json"), "--jobs", "1"]);
    let four = stdout_ok(&["sweep", "--config", &config("opposite_detuning_sweep.json"), "--jobs", "4"]);
    assert_eq!(one, four);
    let idx = column(&one, "index");
    assert_eq!(idx, vec![0.0, 1.0, 2.0, 3.0]);
    let regimes: Vec<&str> = one.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert!(regimes.iter().collect::<std::collections::HashSet<_>>().len() >= 2, "{regimes:?}");
}

#[test]
fn dump_state_writes_sixteen_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    stdout_ok(&[
        "protocol",
        "--config",
        &config("w_state.json"),
        "--out",
        out.to_str().unwrap(),
        "--dump-state",
    ]);
    let dump = std::fs::read_to_string(dir.path().join("w.json.state")).unwrap();
    assert_eq!(dump.lines().count(), 16);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["command"], "protocol");
}

#[test]
fn output_format_follows_flag_over_config() {
    let csv = stdout_ok(&["events", "--config", &config("weak_damping.json"), "--format", "csv"]);
    assert!(csv.starts_with("key,value\n"));
    let from_cfg = stdout_ok(&["events", "--config", &config("weak_damping.json"), "--output.format=csv"]);
    assert_eq!(csv, from_cfg);
}
