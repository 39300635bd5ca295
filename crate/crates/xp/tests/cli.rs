use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_yule-bins");

fn yule_bins(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("YULE_BINS_THREADS");
    if let Some(t) = threads {
        cmd.env("YULE_BINS_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_experiments_shows_stable_ids() {
    let out = yule_bins(&["list-experiments"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with('[')).count(), 10);
    assert_eq!(text.lines().filter(|l| l.contains("replications=")).count(), 10);
    let ids: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with(' '))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert_eq!(
        ids,
        [
            "model-checks",
            "limit-law",
            "two-dim-pp",
            "first-empty",
            "mixed-poisson",
            "lln",
            "deterministic-compare",
            "rare-regimes",
            "double-threshold",
            "rho1-critical"
        ]
    );
}

#[test]
fn outputs_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment_id": "two-dim-pp", "n_grid": 100000, "replications": 300, "x_grid": [0.5, 1.0]}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(format!("out-{threads}"));
        let set = format!("output_dir={}", out_dir.display());
        let out = yule_bins(&["run", "--config", &cfg, "--set", &set], Some(threads));
        let code = out.status.code().unwrap();
        assert!(code == 0 || code == 1, "unexpected exit code {code}");
        let csv = fs::read(out_dir.join("results.csv")).unwrap();
        let summary = fs::read(out_dir.join("summary.json")).unwrap();
        assert!(out_dir.join("plotdata").is_dir());
        outputs.push((csv, summary));
    }
    assert_eq!(outputs[0], outputs[1]);

    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(text.starts_with(
        "experiment_id,check,rho,n,alpha,delta,x,estimate,stderr,reference_value,reference_source,pass\n"
    ));
    let summary: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert_eq!(summary["experiment_id"], "two-dim-pp");
    assert!(summary["criteria"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"experiment_id": "no-such-experiment"}"#,
        r#"{"experiment_id": "lln", "unknown_key": 1}"#,
        r#"{"experiment_id": "mixed-poisson", "rho": 1.5}"#,
        r#"{"experiment_id": "rho1-critical", "beta": 0.5}"#,
        "not json",
    ];
    for body in cases {
        let cfg = write_config(dir.path(), body);
        let out = yule_bins(&["run", "--config", &cfg], None);
        assert_eq!(out.status.code(), Some(2), "config {body}");
    }
    let missing = dir.path().join("missing.json");
    let out = yule_bins(&["run", "--config", missing.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_config(dir.path(), r#"{"experiment_id": "lln"}"#);
    let out = yule_bins(&["run", "--config", &cfg, "--set", "replications"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = yule_bins(&["run", "--config", &cfg], Some("zero"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // so many balls that no bin within the truncation is empty
    let body = format!(
        r#"{{"experiment_id": "first-empty", "n_grid": 1e15, "x_grid": 0.001, "replications": 100, "output_dir": "{}"}}"#,
        dir.path().join("out").display()
    );
    let cfg = write_config(dir.path(), &body);
    let out = yule_bins(&["run", "--config", &cfg], Some("2"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn self_test_passes() {
    let out = yule_bins(&["self-test"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
