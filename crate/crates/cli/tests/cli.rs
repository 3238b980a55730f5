use std::fs;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqls-poisson"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run vqls-poisson")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn print_config_applies_overrides_and_seed() {
    let o = cli(&["op-error", "--print-config", "--set", "problem.n=4", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\"experiment\": \"op-error\""));
    assert!(text.contains("\"n\": 4"));
    assert!(text.contains("\"seed\": 9"));
}

#[test]
fn config_errors_exit_with_2() {
    let unknown_key = cli(&["train", "--print-config", "--set", "problem.nq=4"]);
    assert_eq!(unknown_key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown_key.stderr).contains("problem"));

    assert_eq!(cli(&["no-such-experiment", "--print-config"]).status.code(), Some(2));
    assert_eq!(cli(&["train", "--set", "problem.n=1", "--print-config"]).status.code(), Some(2));
    assert_eq!(cli(&["train"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(cli(&["train", "--config", cfg.to_str().unwrap(), "--print-config"]).status.code(), Some(2));
}

#[test]
fn run_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"sampling": {"samples": 3, "shots": [100, 1000]}}"#).unwrap();
    let args = ["sample-fidelity", "--config", cfg.to_str().unwrap(), "--out", out_s, "--seed", "4"];
    let o = cli(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "raw.csv", "summary.csv", "meta.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let raw = fs::read_to_string(out.join("raw.csv")).unwrap();
    assert_eq!(raw.lines().next(), Some("sample,shots,fidelity"));
    assert_eq!(raw.lines().count(), 1 + 3 * 2);

    assert_eq!(cli(&["verify", "--out", out_s]).status.code(), Some(0));
    // rerunning the same configuration resumes and reproduces the tables
    assert_eq!(cli(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("raw.csv")).unwrap(), raw);

    // a different seed into the same directory is a config conflict
    let other = ["sample-fidelity", "--config", cfg.to_str().unwrap(), "--out", out_s, "--seed", "5"];
    assert_eq!(cli(&other).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("config.json"), "{}").unwrap();
    // verify of a directory without raw.csv fails at run time
    assert_eq!(cli(&["verify", "--out", out.to_str().unwrap()]).status.code(), Some(3));
}
