use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kss_harness::config::{DimModeChoice, InitMethod};
use kss_harness::report::{read_trace, TRACE_HEADER};
use kss_harness::{run_experiment, ExperimentConfig, HarnessError};
use serde_json::Value;

fn kss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kss")).args(args).output().expect("spawn kss")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

/// Twelve points on two lines in R^3, header row included.
fn write_two_lines(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut samples = String::from("x,y,z\n");
    let mut labels = String::new();
    for i in 0..12 {
        let a = 0.5 + i as f64 * 0.25 * if i % 3 == 0 { -1.0 } else { 1.0 };
        let (row, label) = if i % 2 == 0 { ([a, a, 0.0], 1) } else { ([a, -a, a], 2) };
        samples.push_str(&format!("{},{},{}\n", row[0], row[1], row[2]));
        labels.push_str(&format!("{label}\n"));
    }
    let (s, l) = (dir.join("samples.csv"), dir.join("labels.csv"));
    fs::write(&s, samples).unwrap();
    fs::write(&l, labels).unwrap();
    (s, l)
}

#[test]
fn cluster_recovers_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (s, l) = write_two_lines(dir.path());
    let out = dir.path().join("out");
    let o = kss(&[
        "cluster", "--samples", path(&s), "--labels", path(&l), "--tau", "0.5", "--fixed-dims", "1,1", "--out", path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("report.json"));
    let trial = &report["trials"][0];
    assert_eq!(trial["final_accuracy"], 1.0);
    assert_eq!(trial["final_dF2"], 0);
    let assignments = fs::read_to_string(out.join("assignments.csv")).unwrap();
    assert_eq!(assignments.lines().count(), 12);
    assert!(out.join("report.timing.json").exists());
}

#[test]
fn unlabeled_csv_has_empty_truth_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (s, _) = write_two_lines(dir.path());
    let out = dir.path().join("out");
    let o = kss(&[
        "cluster", "--samples", path(&s), "--clusters", "2", "--tau", "0.5", "--fixed-dims", "1,1", "--out", path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trial = &read_json(&out.join("report.json"))["trials"][0];
    for key in ["init_accuracy", "final_accuracy", "final_dF2", "first_exact_iteration", "dims_match"] {
        assert!(trial[key].is_null(), "{key} = {}", trial[key]);
    }
    let text = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRACE_HEADER.join(","));
    assert!(!text.contains('\r'));
    let rows = read_trace(&out.join("trace.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.df2_plus_eps.is_none() && r.objective.is_finite()));
    assert_eq!(rows[0].dims, vec![1, 1]);
}

#[test]
fn bad_input_exits_with_two_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("ragged.csv");
    fs::write(&s, "1,2,3\n4,5\n").unwrap();
    let o = kss(&["init", "--samples", path(&s), "--clusters", "2", "--tau", "0.5", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ragged.csv") && err.contains('2'), "{err}");

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"data": {"mode": "synthetic"}, "kss": {"d_upper": 3}, "bogus": 1}"#).unwrap();
    let o = kss(&["experiment", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));

    let o = kss(&["experiment"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_map_to_exit_three() {
    let e = HarnessError::core("eigensolver", kss_core::Error::NoConvergence { dim: 4, index: 1, iterations: 60, norm: 1.0 });
    assert_eq!(e.exit_code(), 3);
    let e = HarnessError::core("pca", kss_core::Error::InvalidArgument("d = 0".into()));
    assert_eq!(e.exit_code(), 2);
    assert_eq!(HarnessError::config("x").exit_code(), 2);
}

#[test]
fn generate_then_affinity_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    let o = kss(&[
        "generate", "--seed", "11", "--n", "20", "--clusters", "2", "--d-lo", "3", "--d-hi", "4", "--shared", "1",
        "--sizes", "10,14", "--out", d,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let samples = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().filter(|l| !l.is_empty()).count(), 24);
    let meta = read_json(&dir.path().join("metadata.json"));
    assert_eq!(meta["seed"], 11);

    let o = kss(&["affinity", "--metadata", path(&dir.path().join("metadata.json")), "--tau", "0.5", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let aff = read_json(&dir.path().join("affinity.json"));
    let dims: Vec<u64> = aff["dims"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(dims, meta["dims"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect::<Vec<_>>());
    for (k, &dk) in dims.iter().enumerate() {
        let diag = aff["pairwise"][k][k].as_f64().unwrap();
        assert!((diag - (dk as f64).sqrt()).abs() < 1e-12);
    }
    // one shared direction gives affinity at least 1
    assert!(aff["pairwise"][0][1].as_f64().unwrap() >= 1.0 - 1e-12);
    let b = aff["connection_matrix"].as_array().unwrap();
    assert_eq!(b.len(), 2);
    assert!(b.iter().flat_map(|r| r.as_array().unwrap()).all(|x| (0.0..=1.0).contains(&x.as_f64().unwrap())));
}

#[test]
fn config_schema_prints_a_valid_example() {
    let o = kss(&["config-schema"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let example = serde_json::to_string(&v["example"]).unwrap();
    let cfg = ExperimentConfig::from_json(&example).unwrap();
    assert_eq!(cfg, ExperimentConfig::overlapping_reference());
    assert!(v["fields"]["kss.d_upper"].is_string());
}

#[test]
fn fixed_rank_trace_objective_is_non_increasing() {
    let mut cfg = ExperimentConfig::overlapping_reference();
    let syn = cfg.data.synthetic.as_mut().unwrap();
    syn.n = 20;
    syn.d_lo = 2;
    syn.d_hi = 4;
    syn.s = 1;
    syn.cluster_sizes = vec![30, 30, 30];
    cfg.init.method = InitMethod::Random;
    cfg.kss.d_upper = 5;
    cfg.kss.dim_mode = DimModeChoice::Fixed(vec![3, 3, 3]);
    cfg.kss.stop_on_fixed_point = false;
    cfg.kss.max_iters = Some(12);
    cfg.trials = 3;
    let out = run_experiment(&cfg).unwrap();
    for trial in 0..3 {
        let obj: Vec<f64> = out.trace.iter().filter(|r| r.trial == trial).map(|r| r.objective).collect();
        assert_eq!(obj.len(), 13);
        for w in obj.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "trial {trial}: {obj:?}");
        }
    }
}
