use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qskew(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qskew")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Every file under `dir` except the timestamp sidecar, with contents.
fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "run-meta.json" {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const SMALL: &str = r#"{
  "families": [{"name": "ground"}, {"name": "thermal", "q": 0.25}, {"name": "random", "levels": 4, "rank": 2}],
  "dims": [2, 3],
  "levels": [16],
  "levels_2d": 8,
  "hbars": [1.0],
  "p_grid": [1.5, 2.0],
  "seeds": [5],
  "samples": 6,
  "conjecture": {"samples": 3, "pair_levels": [16], "symbol_levels": [12, 24], "symbol_hbars": [1.0]}
}"#;

#[test]
fn verify_default_passes_with_layout_and_golden_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = qskew(&["verify", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("theorem-1d") && stdout.trim_end().ends_with("PASS"));
    let report = read(&out.join("heisenberg").join("ground_N32_hbar1").join("report.csv"));
    assert_eq!(
        report.lines().next().unwrap(),
        "name,kind,lhs,rhs,ratio,pass,slack_tol,truncation_edge_mass,inputs_digest"
    );
    assert!(out.join("heisenberg").join("ground_N32_hbar1").join("summary.json").exists());
    let summary: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(summary["suites"]["theorem-1d"]["min_ratio"].as_f64().unwrap() >= 1.0);
    assert!(out.join("run-meta.json").exists());
}

#[test]
fn zero_slack_exposes_discretization_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = qskew(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--slack-tol", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL "));
}

#[test]
fn verify_is_byte_reproducible_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&qskew(&["verify", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&qskew(&["verify", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--workers", "1"])), 0);
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    assert!(!sa.is_empty());
    assert_eq!(sa, sb);
}

#[test]
fn json_format_writes_report_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = qskew(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rows: serde_json::Value = serde_json::from_str(&read(&out.join("heisenberg").join("ground_N16_hbar1").join("report.json"))).unwrap();
    assert_eq!(rows[0]["name"], "heisenberg");
}

#[test]
fn invalid_configs_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        r#"{"families": []}"#,
        r#"{"families": [{"name": "no-such-family"}]}"#,
        r#"{"hbars": []}"#,
        r#"{"seeds": []}"#,
        r#"{"unknown_key": 1}"#,
        r#"{"command": "search"}"#,
        "not json",
    ];
    for json in cases {
        let cfg = write_config(tmp.path(), json);
        let o = qskew(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{json}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&qskew(&["verify", "--workers", "0"])), 2);
    assert_eq!(code(&qskew(&["bogus"])), 2);
    assert_eq!(code(&qskew(&["verify", "--config", "/nonexistent/config.json"])), 2);
}

#[test]
fn search_is_deterministic_and_replays() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = qskew(&["search", "--dim", "4", "--seed", "11", "--budget", "4000", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out.join("search").join("skew-violation")
    };
    let (a, b) = (run("a"), run("b"));
    let ra = read(&a.join("result.json"));
    assert_eq!(ra, read(&b.join("result.json")));
    for f in ["witness-state.txt", "witness-a.txt", "witness-b.txt"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)));
    }
    let record: serde_json::Value = serde_json::from_str(&ra).unwrap();
    assert_eq!(record["converged"], true);
    assert!(record["best_ratio"].as_f64().unwrap() < 1.0 - 1e-6);
    let o = qskew(&["replay", a.join("result.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let check: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(check["bit_identical"], true);
    assert_eq!(check["violation"], true);
}

#[test]
fn replay_detects_tampered_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(code(&qskew(&["search", "--dim", "3", "--seed", "2", "--budget", "500", "--out", out.to_str().unwrap()])), 0);
    let path = out.join("search").join("skew-violation").join("result.json");
    let mut record: serde_json::Value = serde_json::from_str(&read(&path)).unwrap();
    record["best_ratio"] = serde_json::json!(record["best_ratio"].as_f64().unwrap() * (1.0 + 1e-12));
    fs::write(&path, serde_json::to_string(&record).unwrap()).unwrap();
    assert_eq!(code(&qskew(&["replay", path.to_str().unwrap()])), 1);
    assert_eq!(code(&qskew(&["replay", tmp.path().join("missing.json").to_str().unwrap()])), 2);
}

#[test]
fn search_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = qskew(&["search", "--objective", "heisenberg-violation", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = qskew(&["search", "--dim", "3", "--seed", "1", "--budget", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let record: serde_json::Value = serde_json::from_str(&read(&out.join("search").join("skew-violation").join("result.json"))).unwrap();
    assert_eq!(record["converged"], false);
    assert_eq!(record["iterations"], 32);
    assert!(record["best_ratio"].as_f64().unwrap().is_finite());
}

#[test]
fn constants_text_and_json_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = qskew(&["constants", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let table: serde_json::Value = serde_json::from_str(&read(&out.join("constants").join("table.json"))).unwrap();
    let upper = table["c_d_upper"].as_f64().unwrap();
    let s12 = table["sobolev_12"].as_f64().unwrap();
    assert!((s12 - 0.312184).abs() < 1e-5 && (upper - 0.511655).abs() < 1e-5);
    assert!(text.contains(&upper.to_string()) && text.contains(&s12.to_string()));
    for row in table["c_s"].as_array().unwrap() {
        let v = row["value"].as_f64().unwrap();
        assert!(text.contains(&v.to_string()));
        assert!((row["reflection_form"].as_f64().unwrap() - row["gamma_ratio_form"].as_f64().unwrap()).abs() <= 1e-12);
    }
    let half = table["c_s"].as_array().unwrap().iter().find(|r| r["s"] == 0.5).unwrap();
    assert!((half["value"].as_f64().unwrap() - 1.197753).abs() < 1e-5);
    let o = qskew(&["constants", "--format", "json", "--out", out.to_str().unwrap()]);
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, table);
    assert_eq!(code(&qskew(&["constants", "--d", "0"])), 2);
}

#[test]
fn sweep_writes_tables_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = qskew(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(snapshot(&a), snapshot(&b));
    let batch = read(&a.join("info-batch").join("dim3_seed5").join("batch.csv"));
    assert_eq!(batch.lines().next().unwrap(), "dim,rank,seed,sigma2,I,J,slack1,slack2");
    assert_eq!(batch.lines().count(), 7);
    let breakdown = read(&a.join("conjecture").join("quantum-holder").join("breakdown.csv"));
    assert_eq!(breakdown.lines().next().unwrap(), "hbar,N,count,skipped,max_ratio,q50,q90,q99,max_edge_mass");
    let est: serde_json::Value = serde_json::from_str(&read(&a.join("conjecture").join("weak-holder").join("summary.json"))).unwrap();
    assert_eq!(est["argmax_agrees"], true);
    assert!(est["constant"]["max_ratio"].as_f64().unwrap() > 0.0);
}
