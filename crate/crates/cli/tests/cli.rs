//! Runs the `cpseg` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn cpseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpseg")).args(args).output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap();
    serde_json::from_str::<Value>(line).unwrap()["error"].clone()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path.display().to_string()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

const SMALL_COUNTS: &str = "1\n0\n2\n7\n9\n6\n1\n0\n";

fn small_config(ws: &Workspace) -> String {
    ws.file("small.txt", SMALL_COUNTS);
    ws.file(
        "small.cfg",
        "input = small.txt\nmodel = poisson-gamma\nrho = 2\nlambda = 0.5\nprior = geometric\np = 0.3\n\
         sweeps = 300000\nburn_in = 1000\nthin = 1\nmove_window = 2\n",
    )
}

#[test]
fn enumerate_matches_sample_on_short_series() {
    let ws = Workspace::new();
    let cfg = small_config(&ws);
    let (e, s) = (ws.out("enum"), ws.out("sample"));
    assert!(cpseg(&["enumerate", "--config", &cfg, "--out", e.to_str().unwrap()])
        .status
        .success());
    assert!(cpseg(&["sample", "--config", &cfg, "--out", s.to_str().unwrap()])
        .status
        .success());
    let exact = floats(&summary(&e)["k_dist"]);
    let sampled = floats(&summary(&s)["k_dist"]);
    assert_eq!(exact.len(), 8);
    let tv: f64 = 0.5
        * (0..exact.len())
            .map(|k| (exact[k] - sampled.get(k).copied().unwrap_or(0.0)).abs())
            .sum::<f64>();
    assert!(tv < 0.02, "k TV {tv}");

    let pos = |dir: &Path| -> Vec<f64> {
        std::fs::read_to_string(dir.join("pos_prob.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let (pe, ps) = (pos(&e), pos(&s));
    assert_eq!(pe.len(), 7);
    for (a, b) in pe.iter().zip(&ps) {
        assert!((a - b).abs() < 0.02, "{pe:?} vs {ps:?}");
    }
}

#[test]
fn outputs_and_config_echo() {
    let ws = Workspace::new();
    let cfg = small_config(&ws);
    let out = ws.out("run");
    let status = cpseg(&[
        "sample",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--set",
        "sweeps=2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let s = summary(&out);
    assert_eq!(s["seed"], 5);
    assert_eq!(s["config"]["seed"], "5");
    assert_eq!(s["config"]["sweeps"], "2000");
    assert!(Path::new(s["config"]["input"].as_str().unwrap()).is_absolute());
    for key in ["k_dist", "hyper_means", "acceptance", "iact"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "sweep,k,p,rho,lambda,log_post,taus");
    assert_eq!(lines.count(), 2000);

    let again = ws.out("again");
    let echo = out.join("summary.json");
    assert!(cpseg(&[
        "sample",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        again.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(trace, std::fs::read_to_string(again.join("trace.csv")).unwrap());
}

#[test]
fn recurse_and_independence() {
    let ws = Workspace::new();
    let cfg = small_config(&ws);
    let out = ws.out("rec");
    let status = cpseg(&[
        "recurse",
        "--config",
        &cfg,
        "--set",
        "draws=5000",
        "--set",
        "independence_sweeps=3000",
        "--set",
        "update_gamma=true",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let s = summary(&out);
    assert_eq!(s["draws"], 5000);
    assert!(s["log_evidence"].as_f64().unwrap().is_finite());
    assert!(s["independence"]["unique_visited"].as_u64().unwrap() >= 1);
    let draws = std::fs::read_to_string(out.join("draws.csv")).unwrap();
    assert_eq!(draws.lines().count(), 5001);
    assert!(out.join("trace.csv").exists());
}

#[test]
fn sweep_writes_modal_k_per_grid_value() {
    let ws = Workspace::new();
    let out = ws.out("sweep");
    let status = cpseg(&[
        "sweep",
        "--set",
        "preset=streakiness",
        "--set",
        "draws=2000",
        "--set",
        "grid=0.01,0.05,0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "value,modal_k,tie");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1.0000000000000000e-2,"));
}

#[test]
fn exit_codes_and_error_objects() {
    let ws = Workspace::new();

    let out = cpseg(&["sample", "--set", "nonsense=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["kind"], "config");

    let out = cpseg(&["sample", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let data = ws.file("bad.txt", "1\n2\nthree\n");
    let out = cpseg(&[
        "sample",
        "--set",
        &format!("input={data}"),
        "--set",
        "model=poisson-gamma",
        "--set",
        "rho=1",
        "--set",
        "lambda=1",
        "--set",
        "prior=even-order-stats",
        "--out",
        ws.out("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_error(&out);
    assert_eq!(err["kind"], "data");
    assert_eq!(err["line"], 3);

    let data = ws.file("neg.txt", "1\n-2\n");
    let out = cpseg(&[
        "sample",
        "--set",
        &format!("input={data}"),
        "--set",
        "model=poisson-gamma",
        "--set",
        "rho=1",
        "--set",
        "lambda=1",
        "--set",
        "prior=even-order-stats",
        "--out",
        ws.out("y").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = cpseg(&[
        "enumerate",
        "--set",
        "preset=coal",
        "--out",
        ws.out("z").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = cpseg(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let out = cpseg(&["keys"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("bin_days"));
}
