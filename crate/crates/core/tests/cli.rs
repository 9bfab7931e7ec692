//! The binary: exit codes, messages and output files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const QUICK: &str = r#"{"schema_version": 1,
    "physical": {"trap_frequency_hz": 207e3, "gradient_t_per_m": 38.5, "n_cm": 6, "n_br": 2, "nbar_initial": 0.0},
    "schedule": {"rabi_hz": 26.6e3},
    "model": {"kind": "simplified"}}"#;

fn mwgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwgate")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_and_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", QUICK);
    let out = tmp.path().join("out");
    let o = mwgate(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("rad/s"), "frequencies are echoed in both units");
    let csv = std::fs::read_to_string(out.join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "value,mean_fidelity,stderr,log10_infidelity,n_realizations,seed");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    assert_eq!(row[4], "1", "noiseless vacuum run is a single trajectory");
    assert_eq!(row[5], "3");
    let f: f64 = row[1].parse().unwrap();
    assert!(f > 0.99 && f < 1.0, "{f}");

    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(rec["schema_version"], 1);
    assert_eq!(rec["master_seed"], 3);
    assert_eq!(rec["config_hash"].as_str().unwrap().len(), 64);
    assert!(rec["wall_time_s"].as_f64().unwrap() >= 0.0);
    let point = &rec["series"][0]["points"][0];
    assert!(point["schedule"]["ratio"].as_u64().unwrap() > 1);
    assert!(point["frequencies_hz"]["rabi"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = write(tmp.path(), "m.json", r#"{"schema_version": 1, "physical": {"trap_frequency_hz": 207e3}, "schedule": {"rabi_hz": 2e4}}"#);
    let o = mwgate(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gradient_t_per_m"), "{}", stderr(&o));

    let unknown = write(tmp.path(), "u.json", &QUICK.replace("\"n_cm\"", "\"n_c\""));
    let o = mwgate(&["run", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_c"), "{}", stderr(&o));

    let cfg = write(tmp.path(), "c.json", QUICK);
    let o = mwgate(&["run", "--config", cfg.to_str().unwrap(), "--preset", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mwgate(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "schedule.nope", "--values", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mwgate(&["run", "--config", tmp.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // far too coarse a fixed step for the trap frequency: the norm check trips
    let bad = QUICK.replace(r#""model": {"kind": "simplified"}"#, r#""model": {"kind": "simplified"}, "integrator": {"dt": 2e-5, "max_step_fraction_of_fastest_period": 1.0, "max_phase_per_step": 1e6}"#);
    let cfg = write(tmp.path(), "c.json", &bad);
    let o = mwgate(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("runtime error"), "{}", stderr(&o));
}

#[test]
fn sweep_rows_follow_the_value_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", QUICK);
    let out = tmp.path().join("s");
    let o = mwgate(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--param", "errors.rabi_rel", "--values", "0.01,-0.01,0",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("sweep_errors.rabi_rel.csv")).unwrap();
    let values: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(values, ["0.01", "-0.01", "0"]);
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rec["parameter"], "errors.rabi_rel");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let noisy = QUICK.replace(
        r#""model": {"kind": "simplified"}"#,
        r#""model": {"kind": "simplified"}, "noise": {"magnetic": {"tau_s": 0.2e-3, "t2_s": 2e-3}}, "ensemble": {"n_realizations": 3}"#,
    );
    let cfg = write(tmp.path(), "n.json", &noisy);
    let csv = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        let o = mwgate(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out.join("run.csv")).unwrap()
    };
    let a = csv("a", "9");
    assert_eq!(a, csv("b", "9"));
    assert_ne!(a, csv("c", "10"));
}
