use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qke(dir: &Path, config: &str, command: &str) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qke"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const TOY: &str = r#"
seed = 5
[dataset]
m = 8
n_features = 4
[feature_map]
n_qubits = 3
"#;

#[test]
fn kernels_exact_writes_unit_diagonal() {
    let dir = TempDir::new().unwrap();
    let out = qke(dir.path(), TOY, "kernels");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    for f in ["kernel.csv", "kernel.meta.json", "kernel.json"] {
        assert!(o.join(f).exists(), "missing {f}");
    }
    let mut rdr = csv::Reader::from_path(o.join("kernel.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 8);
        assert!((row[i] - 1.0).abs() < 1e-12);
        for (j, v) in row.iter().enumerate() {
            assert!((v - rows[j][i]).abs() < 1e-12);
        }
    }
    let doc = read_json(&o.join("kernel.json"));
    assert_eq!(doc["tool"], "qke");
    assert_eq!(doc["command"], "kernels");
    assert_eq!(doc["config"]["seed"], 5);
}

#[test]
fn sampled_kernel_records_seed_and_shots() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{TOY}[kernel]\nmode = \"sampled\"\nn_shots = 200\n");
    let out = qke(dir.path(), &cfg, "kernels");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("out/kernel.json"));
    let meta = &doc["result"]["kernel"];
    // Sampling draws from seed + 2.
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["n_shots"], 200);
    assert_eq!(meta["total_shots"], 200 * 8 * 7 / 2);

    // Same seed reproduces the same matrix.
    let first = fs::read_to_string(dir.path().join("out/kernel.csv")).unwrap();
    let again = qke(dir.path(), &cfg, "kernels");
    assert!(again.status.success());
    assert_eq!(first, fs::read_to_string(dir.path().join("out/kernel.csv")).unwrap());
}

#[test]
fn invalid_config_exits_2_with_json_error() {
    let dir = TempDir::new().unwrap();
    let out = qke(dir.path(), "[feature_map]\nentanglement = \"ring\"\n", "kernels");
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    assert!(err["message"].as_str().unwrap().contains("entanglement") || err["message"].as_str().unwrap().contains("ring"));

    let out = qke(dir.path(), "[dataset]\nbogus = 1\n", "kernels");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_shots_reports_dataset_budget() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{TOY}[shots]\neps = 0.5\n");
    let out = qke(dir.path(), &cfg, "estimate-shots");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("out/shots.json"));
    let b = &doc["result"]["dataset_budget"];
    let n = b["n_required"].as_u64().unwrap();
    assert!(n >= b["n_spread"]["shots"].as_u64().unwrap_or(0));
    assert!(n >= 1);
}

#[test]
fn sweep_writes_series_and_fits() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
seed = 3
[dataset]
m = 10
n_features = 8
[sweep]
n_min = 2
n_max = 6
n_targets = [4, 12]
"#;
    let out = qke(dir.path(), cfg, "sweep");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("inside the fitted range"), "{stderr}");

    let o = dir.path().join("out");
    let mut rdr = csv::Reader::from_path(o.join("series.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["statistic", "n", "value", "dataset_id"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let mut stats: Vec<String> = rows.iter().map(|r| r[0].to_string()).collect();
    stats.sort();
    stats.dedup();
    assert!(stats.len() >= 4, "{stats:?}");
    assert!(rows.len() >= 4 * 5);

    let fits = read_json(&o.join("series_fits.json"));
    let records = fits["result"]["fits"].as_array().unwrap();
    assert!(!records.is_empty());
    for r in records {
        if let Some(f) = r["fit"].as_object() {
            assert!(f.contains_key("dropped_prefix"));
            assert!(f.contains_key("valid"));
        }
    }
    assert!(fits["result"]["summary"].as_array().unwrap().iter().any(|s| s["mean_alpha"].is_number()));
    assert!(o.join("series.meta.json").exists());
}

#[test]
fn resources_reports_crossover_with_classical_profile() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{TOY}[resources]\nn_shots = 1000\ncrossover_max_n = 40\n[resources.shots_scaling]\nlog2_c = 10.0\nalpha = 0.1\n[resources.classical]\nalpha_fq = 1.07\nalpha_pq = 2.3\nc0 = 1000.0\nflops = 1e12\nwatts = 500.0\n"
    );
    let out = qke(dir.path(), &cfg, "resources");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("out/resources.json"));
    let report = &doc["result"]["report"];
    assert_eq!(report["total_shots"], 1000 * 8 * 7 / 2);
    assert!(report.get("crossover_n").is_some());
    assert!(report["runtime_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn characterize_writes_both_statistics() {
    let dir = TempDir::new().unwrap();
    let cfg = "[dataset]\nm = 6\nn_features = 4\n[sweep]\nn_min = 2\nn_max = 4\n";
    let out = qke(dir.path(), cfg, "characterize");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/characteristics.csv")).unwrap();
    assert!(text.contains("expressibility"));
    assert!(text.contains("relative_entropy"));
    assert!(dir.path().join("out/characteristics_fits.json").exists());
}
