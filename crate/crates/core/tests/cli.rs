//! End-to-end runs of the `macrosim` binary.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use macrosim::config::SimConfig;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_macrosim"))
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL: &str = "seed = 5\nhorizon = 40\nhouseholds = 10\nfirms = 3\n";

#[test]
fn run_writes_logs_with_derived_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("logs");
    let o = run(&["run", "--config", config.to_str().unwrap(), "--episodes", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..3 {
        let manifest: Value =
            serde_json::from_str(&std::fs::read_to_string(out.join(format!("episode_{k:04}.json"))).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 5 + k);
        assert_eq!(manifest["periods"], 40);
    }
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 4, "{stdout}");
    assert!(stdout.starts_with("episode\tseed\treal_gdp\tunemployment\tgini"));
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "horizon = 4\n\n[firm]\nalfa = 0.5\n");
    let o = run(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("alfa") && err.contains("line 4"), "{err}");
}

#[test]
fn remote_bindings_are_refused_by_run() {
    let o = run(&["run", "--config", repo_file("configs/serve.toml").to_str().unwrap(), "--out", "/nonexistent"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_default_config_matches_builtin_defaults() {
    let mut shipped = SimConfig::from_path(&repo_file("configs/default.toml")).unwrap();
    shipped.seed = 0;
    assert_eq!(shipped, SimConfig::default());
    for name in ["small", "regional", "serve"] {
        SimConfig::from_path(&repo_file(&format!("configs/{name}.toml"))).unwrap();
    }
}

/// Gini by mean absolute difference over all ordered pairs. Debts shift
/// every value up so the smallest is zero, as the report does.
fn gini_pairs(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let min = x.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let mean = x.iter().sum::<f64>() / n - min;
    let diff: f64 = x.iter().flat_map(|a| x.iter().map(move |b| (a - b).abs())).sum();
    diff / (2.0 * n * n * mean)
}

#[test]
fn analyze_pipeline_is_pure_and_gini_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let logs = dir.path().join("logs");
    let o = run(&["run", "--config", config.to_str().unwrap(), "--out", logs.to_str().unwrap()]);
    assert!(o.status.success());
    let csv_path = logs.join("episode.csv");

    let reports: Vec<String> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = run(&["analyze", csv_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            std::fs::read_to_string(out.join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);

    // wealth Gini recomputed straight from the CSV's final savings column
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (t, kind, next) = (col("t"), col("agent_type"), col("next_savings"));
    let savings: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[t] == "39" && &r[kind] == "household")
        .map(|r| r[next].parse().unwrap())
        .collect();
    assert_eq!(savings.len(), 10);
    let report: Value = serde_json::from_str(&reports[0]).unwrap();
    let gini = report["inequality"]["wealth"]["gini"].as_f64().unwrap();
    assert!((gini - gini_pairs(&savings)).abs() < 1e-12, "{gini} vs {}", gini_pairs(&savings));
    for block in ["correlations", "inequality", "firms", "relations"] {
        assert!(!report[block].is_null(), "{block}");
    }
}

#[test]
fn analyze_rejects_mismatched_horizons() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (name, horizon) in [("a", 30), ("b", 31)] {
        let config = dir.path().join(format!("{name}.toml"));
        std::fs::write(&config, format!("horizon = {horizon}\nhouseholds = 4\nfirms = 2\n")).unwrap();
        let out = dir.path().join(name);
        assert!(run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
        paths.push(out.join("episode.csv"));
    }
    let o = run(&["analyze", paths[0].to_str().unwrap(), paths[1].to_str().unwrap(), "--out", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 30"));
}

#[test]
fn bench_scaling_prints_table() {
    let o = run(&["bench-scaling", "--preset", "quarterly", "--sizes", "1,2,3", "--reps", "2"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().skip(1).take(3).collect();
    assert!(rows.iter().all(|r| r.ends_with("\ttrue")), "{stdout}");
    assert!(stdout.contains("messages_quadratic_r2\t1.000000"), "{stdout}");
}

#[test]
fn calibrate_emits_config_fragment() {
    let o = run(&["calibrate", repo_file("data/industry_synthetic.csv").to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let fragment = &stdout[stdout.find("[firm]").unwrap()..];
    let config = SimConfig::from_toml_str(&format!("households = 3\nfirms = 2\n{fragment}")).unwrap();
    assert!(config.firm.alpha != SimConfig::default().firm.alpha);
}

#[test]
fn stdio_serve_answers_reset() {
    let mut child = bin()
        .args(["serve", "--stdio", "--config", repo_file("configs/serve.toml").to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    writeln!(stdin, r#"{{"kind":"reset","seed":3}}"#).unwrap();
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let frame: Value = serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(frame["kind"], "obs");
    assert_eq!(frame["t"], 0);
    assert_eq!(frame["agents"].as_array().unwrap().len(), 13);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn connect(port: u16) -> TcpStream {
    let deadline = Instant::now() + Duration::from_secs(20);
    loop {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(s) => return s,
            Err(e) if Instant::now() > deadline => panic!("server never came up: {e}"),
            Err(_) => thread::sleep(Duration::from_millis(50)),
        }
    }
}

#[cfg(unix)]
#[test]
fn tcp_serve_shuts_down_on_sigterm() {
    let port = free_port();
    let listen = format!("tcp:127.0.0.1:{port}");
    let mut child = bin()
        .args(["serve", "--listen", &listen, "--config", repo_file("configs/serve.toml").to_str().unwrap()])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let stream = connect(port);
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    writeln!(writer, r#"{{"kind":"reset","seed":1}}"#).unwrap();
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let frame: Value = serde_json::from_str(&line).unwrap();
    assert_eq!((frame["kind"].as_str(), frame["t"].as_u64()), (Some("obs"), Some(0)));

    let kill = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    assert!(kill.success());
    line.clear();
    reader.read_line(&mut line).unwrap();
    let frame: Value = serde_json::from_str(&line).unwrap();
    assert_eq!((frame["kind"].as_str(), frame["code"].as_str()), (Some("error"), Some("shutdown")));
    assert!(child.wait().unwrap().success());
}

#[test]
fn busy_endpoint_fails() {
    let held = TcpListener::bind("127.0.0.1:0").unwrap();
    let listen = format!("tcp:{}", held.local_addr().unwrap());
    let o = run(&["serve", "--listen", &listen]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains(&listen));
}
