use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use vqls_core::harness::{
    self, apply_override, report_percentiles, run_in_memory, ExperimentConfig, ExperimentKind, Table,
};
use vqls_core::optimize::OptimizerMethod;
use vqls_core::*;

fn stat(summary: &Table, group: &str, statistic: &str) -> f64 {
    summary
        .rows
        .iter()
        .find(|r| r[0] == group && r[1] == statistic)
        .unwrap_or_else(|| panic!("no {group}/{statistic}"))[2]
        .parse()
        .unwrap()
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_experiment(kind).with_master_seed(11);
    c.sampling.samples = 4;
    c.sampling.bases = 3;
    c.sampling.directions = 5;
    c.sampling.shots = vec![100, 1000];
    c.optimizer.starts = 3;
    c.optimizer.max_evals = 60;
    c
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn percentile_rule() {
    let v = [1.0, 2.0, 3.0, 4.0];
    let p = report_percentiles(&v, &[0.0, 50.0, 100.0]).unwrap();
    assert_eq!(p, vec![(0.0, 1.0), (50.0, 2.0), (100.0, 4.0)]);
    assert!(report_percentiles(&v, &[101.0]).is_err());

    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let u: Vec<f64> = (0..1000).map(|_| r.random::<f64>()).collect();
    let p95 = report_percentiles(&u, &[95.0]).unwrap()[0].1;
    assert!((0.93..=0.97).contains(&p95), "{p95}");
}

#[test]
fn every_experiment_runs_and_verifies() {
    for kind in ExperimentKind::ALL {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(kind);
        let report = harness::run(&cfg, dir.path()).unwrap();
        assert_eq!(report.raw.header, harness::raw_header(kind));
        assert!(!report.raw.rows.is_empty());
        for f in [harness::CONFIG_FILE, harness::RAW_FILE, harness::SUMMARY_FILE, harness::META_FILE] {
            assert!(dir.path().join(f).exists(), "{kind}: {f}");
        }
        harness::verify(dir.path()).unwrap();
        let (raw, summary) = run_in_memory(&cfg).unwrap();
        assert_eq!(raw, report.raw, "{kind}");
        assert_eq!(summary, report.summary, "{kind}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small(ExperimentKind::InnerpError);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    harness::run(&cfg, a.path()).unwrap();
    harness::run(&cfg, b.path()).unwrap();
    for f in [harness::CONFIG_FILE, harness::RAW_FILE, harness::SUMMARY_FILE] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let strip = |d: &Path| {
        let mut m: serde_json::Value = serde_json::from_str(&read(d, harness::META_FILE)).unwrap();
        for k in ["started_at_unix", "finished_at_unix", "elapsed_seconds"] {
            m.as_object_mut().unwrap().remove(k);
        }
        m
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn interrupted_run_resumes_to_the_same_tables() {
    let cfg = small(ExperimentKind::Train);
    let full = tempfile::tempdir().unwrap();
    harness::run(&cfg, full.path()).unwrap();
    let raw = read(full.path(), harness::RAW_FILE);

    let part = tempfile::tempdir().unwrap();
    fs::write(part.path().join(harness::CONFIG_FILE), read(full.path(), harness::CONFIG_FILE)).unwrap();
    // keep run 0, half of run 1, and a torn last line
    let lines: Vec<&str> = raw.lines().collect();
    let run1: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].starts_with("1,")).collect();
    let cut = run1[run1.len() / 2];
    let mut torn = lines[..cut].join("\n");
    torn.push('\n');
    torn.push_str(&lines[cut][..lines[cut].len() / 2]);
    fs::write(part.path().join(harness::RAW_FILE), torn).unwrap();

    let report = harness::run(&cfg, part.path()).unwrap();
    assert_eq!(read(part.path(), harness::RAW_FILE), raw);
    assert_eq!(read(part.path(), harness::SUMMARY_FILE), read(full.path(), harness::SUMMARY_FILE));
    assert_eq!(report.meta["units_resumed"], 1);
    assert_eq!(report.meta["units_computed"], 2);
}

#[test]
fn different_config_in_run_dir_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::SampleFidelity);
    harness::run(&cfg, dir.path()).unwrap();
    let mut other = cfg.clone();
    other.sampling.samples = 5;
    let err = harness::run(&other, dir.path()).unwrap_err();
    assert!(err.is_config());
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    harness::run(&small(ExperimentKind::GradSimilarity), dir.path()).unwrap();
    let path = dir.path().join(harness::SUMMARY_FILE);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen("count,4", "count,5", 1)).unwrap();
    assert!(harness::verify(dir.path()).is_err());
}

#[test]
fn op_error_decreases_with_shots() {
    let mut cfg = ExperimentConfig::for_experiment(ExperimentKind::OpError).with_master_seed(3);
    cfg.problem.n = 5;
    cfg.problem.layers = 3;
    cfg.sampling.samples = 30;
    cfg.sampling.methods = vec![Method::Liu21];
    let (_, summary) = run_in_memory(&cfg).unwrap();
    let means: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|s| stat(&summary, &format!("method=liu21;shots={s}"), "mean"))
        .collect();
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
}

#[test]
fn cost_variation_row_counts() {
    let mut cfg = small(ExperimentKind::CostVariation);
    cfg.sampling.steps = vec![0.1, 1.0];
    let (raw, summary) = run_in_memory(&cfg).unwrap();
    let q = raw.column("quantity").unwrap();
    let var = raw.rows.iter().filter(|r| r[q] == "variation").count();
    let est = raw.rows.iter().filter(|r| r[q] == "estimation_error").count();
    assert_eq!(var, 3 * 5 * 2);
    assert_eq!(est, 3 * 2);
    assert_eq!(stat(&summary, &format!("quantity=variation;step={};shots=", vqls_core::vqls::fmt_f64(0.1)), "count"), 15.0);
    let ctx = harness::Context::new(&cfg).unwrap();
    for b in 0..3 {
        for d in 0..5 {
            let delta = ctx.direction(b, d);
            assert_eq!(delta.len(), ctx.problem.n_params());
            assert!(delta.iter().all(|v| v.abs() <= std::f64::consts::TAU));
        }
    }
}

#[test]
fn train_summary_reports_best_run() {
    let mut cfg = small(ExperimentKind::Train);
    cfg.optimizer.method = OptimizerMethod::Bfgs;
    let (raw, summary) = run_in_memory(&cfg).unwrap();
    let best_cost = stat(&summary, "best", "best_cost");
    let c = raw.column("cost_est").unwrap();
    let min = raw.rows.iter().map(|r| r[c].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert_eq!(best_cost, min);
    assert_eq!(stat(&summary, "runs", "best_fidelity_count"), 3.0);
}

#[test]
fn config_overrides_and_errors() {
    let cfg = ExperimentConfig::load(None, &["problem.n=4".into(), "cost=cnn".into()]).unwrap();
    assert_eq!(cfg.problem.n, 4);
    assert_eq!(cfg.cost, CostKind::CNN);
    let err = ExperimentConfig::load(None, &["problem.bogus=1".into()]).unwrap_err();
    match err {
        Error::Config { path, .. } => assert!(path.contains("problem"), "{path}"),
        e => panic!("{e}"),
    }
    assert!(ExperimentConfig::load(None, &["problem.n=1".into()]).unwrap_err().is_config());
    let mut doc = serde_json::json!({});
    apply_override(&mut doc, "a.b.c=3").unwrap();
    assert_eq!(doc["a"]["b"]["c"], 3);
    assert!(apply_override(&mut doc, "novalue").is_err());
    let round = ExperimentConfig::from_json(&cfg.to_json_pretty()).unwrap();
    assert_eq!(round, cfg);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn percentiles_are_order_statistics(mut v in prop::collection::vec(-1e6f64..1e6, 1..200), q in 0.0f64..=100.0) {
        let p = report_percentiles(&v, &[q]).unwrap()[0].1;
        v.sort_by(f64::total_cmp);
        prop_assert!(v.contains(&p));
        let below = v.iter().filter(|&&x| x <= p).count();
        prop_assert!(below as f64 >= q / 100.0 * v.len() as f64);
        prop_assert!(p >= v[0] && p <= v[v.len() - 1]);
    }

    #[test]
    fn tables_round_trip(rows in prop::collection::vec(prop::collection::vec("[a-z0-9,\" ]{0,6}", 3), 0..20)) {
        let mut t = Table::new(&["a", "b", "c"]);
        t.rows = rows;
        prop_assert_eq!(Table::from_csv(&t.to_csv()).unwrap(), t);
    }
}
