use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use pceuq::benchmarks::{ishigami_sampler, load_vine};
use pceuq::pce::PceModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn pceuq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pceuq")).args(args).env_remove("PCEUQ_SEED").output().unwrap()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) {
    let mut s = header.join(",") + "\n";
    for r in rows {
        s += &r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        s += "\n";
    }
    std::fs::write(path, s).unwrap();
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ishigami training data with header x1,x2,x3,y.
fn ishigami_csv(dir: &TempDir, n: usize) -> (PathBuf, Vec<Vec<f64>>) {
    let data = ishigami_sampler(n, 3);
    let rows: Vec<Vec<f64>> = data.x.iter().zip(&data.y).map(|(x, y)| [x.clone(), vec![*y]].concat()).collect();
    let path = p(dir, "train.csv");
    write_csv(&path, &["x1", "x2", "x3", "y"], &rows);
    (path, data.x)
}

fn fitted_model(dir: &TempDir) -> (PathBuf, PathBuf, Vec<Vec<f64>>) {
    let (data, x) = ishigami_csv(dir, 120);
    let model = p(dir, "model.json");
    let out = pceuq(&["fit", "--data", s(&data), "--mode", "apce-x", "--seed", "42", "--out", s(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (data, model, x)
}

#[test]
fn fit_writes_model_with_defaults() {
    let dir = TempDir::new().unwrap();
    let (_, model, _) = fitted_model(&dir);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["metadata"]["q"], 0.75);
    assert_eq!(json["metadata"]["seed"], 42);
    assert_eq!(json["mode"], "aPCEonX");
}

#[test]
fn fit_reports_selection() {
    let dir = TempDir::new().unwrap();
    let (data, _) = ishigami_csv(&dir, 80);
    let out = pceuq(&["fit", "--data", s(&data), "--out", s(&p(&dir, "m.json"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("selected p = "), "{text}");
    assert!(text.contains("LOO error"));
    assert!(text.contains("basis size"));
}

#[test]
fn missing_file_exits_2() {
    let out = pceuq(&["fit", "--data", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_rows_are_errors() {
    let dir = TempDir::new().unwrap();
    let path = p(&dir, "bad.csv");
    std::fs::write(&path, "a,b\n1,2\n3,oops\n").unwrap();
    let out = pceuq(&["fit", "--data", s(&path), "--out", s(&p(&dir, "m.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn target_column_by_name() {
    let dir = TempDir::new().unwrap();
    let data = ishigami_sampler(60, 5);
    let rows: Vec<Vec<f64>> = data.x.iter().zip(&data.y).map(|(x, y)| vec![*y, x[0], x[1], x[2]]).collect();
    let path = p(&dir, "t.csv");
    write_csv(&path, &["y", "a", "b", "c"], &rows);
    let model = p(&dir, "m.json");
    let out = pceuq(&["fit", "--data", s(&path), "--target", "y", "--out", s(&model)]);
    assert!(out.status.success());
    let m = PceModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m.dim(), 3);
    let out = pceuq(&["fit", "--data", s(&path), "--target", "nope", "--out", s(&model)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lpce_z_on_one_input_skips_copula() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<f64>> = (0..50).map(|i| i as f64 / 49.0).map(|x| vec![x, x * x + 1.0]).collect();
    let path = p(&dir, "d1.csv");
    write_csv(&path, &["x", "y"], &rows);
    let model = p(&dir, "m.json");
    let out = pceuq(&["fit", "--data", s(&path), "--mode", "lpce-z", "--out", s(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = PceModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert!(m.copula().is_none());
    assert!((m.predict(&[0.5]).unwrap() - 1.25).abs() < 5e-2);
}

#[test]
fn predict_matches_in_memory_model() {
    let dir = TempDir::new().unwrap();
    let (_, model, x) = fitted_model(&dir);
    let inputs = p(&dir, "x.csv");
    write_csv(&inputs, &["x1", "x2", "x3"], &x);
    let pred = p(&dir, "pred.csv");
    let out = pceuq(&["predict", "--model", s(&model), "--data", s(&inputs), "--out", s(&pred)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("out-of-hull fraction 0.0000"));
    let m = PceModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let (header, rows) = read_csv(&pred);
    assert_eq!(header, ["x1", "x2", "x3", "y_pred"]);
    for (r, xi) in rows.iter().zip(&x) {
        assert_eq!(r[3].to_bits(), m.predict(xi).unwrap().to_bits());
    }
}

#[test]
fn predict_reports_out_of_hull() {
    let dir = TempDir::new().unwrap();
    let (_, model, _) = fitted_model(&dir);
    let inputs = p(&dir, "x.csv");
    write_csv(&inputs, &["x1", "x2", "x3"], &[vec![0.0, 0.0, 0.0], vec![10.0, 0.0, 0.0]]);
    let out = pceuq(&["predict", "--model", s(&model), "--data", s(&inputs)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("out-of-hull fraction 0.5000"));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
}

#[test]
fn predict_empty_csv_keeps_header() {
    let dir = TempDir::new().unwrap();
    let (_, model, _) = fitted_model(&dir);
    let inputs = p(&dir, "empty.csv");
    std::fs::write(&inputs, "x1,x2,x3\n").unwrap();
    let out = pceuq(&["predict", "--model", s(&model), "--data", s(&inputs)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "x1,x2,x3,y_pred");
}

#[test]
fn predict_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let (_, model, _) = fitted_model(&dir);
    let inputs = p(&dir, "x2.csv");
    write_csv(&inputs, &["a", "b"], &[vec![0.0, 1.0]]);
    let out = pceuq(&["predict", "--model", s(&model), "--data", s(&inputs)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema mismatch"));
}

fn stats_json(args: &[&str]) -> serde_json::Value {
    let out = pceuq(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn stats_output_shape_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let (_, model, _) = fitted_model(&dir);
    let args = ["stats", "--model", s(&model), "--n-resample", "20000", "--sampler", "random", "--seed", "9"];
    let a = stats_json(&args);
    let b = stats_json(&args);
    assert_eq!(a, b);
    assert_eq!(a["pdf"]["grid"].as_array().unwrap().len(), 512);
    assert_eq!(a["pdf"]["density"].as_array().unwrap().len(), 512);
    assert_eq!(a["n_resample"], 20000);
    assert_eq!(a["sampler"], "pseudo_random");
    // The benchmark output is a rescaled Ishigami response with mean 1.5.
    assert!((a["mean"].as_f64().unwrap() - 1.5).abs() < 0.05, "{}", a["mean"]);
}

#[test]
fn stats_full_support_flag() {
    let dir = TempDir::new().unwrap();
    let (_, model, _) = fitted_model(&dir);
    let hull = stats_json(&["stats", "--model", s(&model), "--n-resample", "20000"]);
    let full = stats_json(&["stats", "--model", s(&model), "--n-resample", "20000", "--full-support"]);
    assert_ne!(hull["std"], full["std"]);
    let out = pceuq(&["stats", "--model", s(&model), "--n-resample", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_of_constant_model() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 11) as f64, 2.5]).collect();
    let path = p(&dir, "c.csv");
    write_csv(&path, &["a", "b", "y"], &rows);
    let model = p(&dir, "m.json");
    let out = pceuq(&["fit", "--data", s(&path), "--out", s(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let st = stats_json(&["stats", "--model", s(&model), "--n-resample", "10000"]);
    assert_eq!(st["std"], 0.0);
    assert!((st["mean"].as_f64().unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn seed_env_fallback() {
    let dir = TempDir::new().unwrap();
    let (data, _) = ishigami_csv(&dir, 60);
    let model = p(&dir, "m.json");
    let out = Command::new(env!("CARGO_BIN_EXE_pceuq"))
        .args(["fit", "--data", s(&data), "--out", s(&model)])
        .env("PCEUQ_SEED", "17")
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["metadata"]["seed"], 17);
}

#[test]
fn benchmark_quick_run() {
    let dir = TempDir::new().unwrap();
    let csv = p(&dir, "bench.csv");
    let t0 = Instant::now();
    let out = pceuq(&["benchmark", "ishigami", "--n-train", "100", "--reps", "2", "--quick", "--out", s(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(t0.elapsed().as_secs() < 120);
    let (header, rows) = {
        let mut rdr = csv::Reader::from_path(&csv).unwrap();
        let h: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        let r: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        (h, r)
    };
    assert_eq!(header[..4], ["benchmark", "mode", "n_train", "rep"]);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[0] == "ishigami" && &r[2] == "100"));
}

#[test]
fn benchmark_is_deterministic_and_rejects_unknown_names() {
    let args = ["benchmark", "ishigami", "--n-train", "30", "--reps", "2", "--n-val", "500", "--seed", "3", "--jobs", "1"];
    let strip = |o: Output| -> Vec<String> {
        // Drop the wall-clock column.
        String::from_utf8(o.stdout).unwrap().lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    assert_eq!(strip(pceuq(&args)), strip(pceuq(&args)));
    let out = pceuq(&["benchmark", "rosenbrock"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown benchmark"));
}

#[test]
fn copula_fit_independent_columns() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    use rand::Rng;
    let rows: Vec<Vec<f64>> = (0..2000).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
    let path = p(&dir, "u.csv");
    write_csv(&path, &["a", "b", "c"], &rows);
    let json = p(&dir, "cop.json");
    let out = pceuq(&["copula-fit", "--data", s(&path), "--out", s(&json)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let pairs = v["copula"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    // AIC can still prefer a near-null one-parameter family by chance.
    let text = String::from_utf8(out.stdout).unwrap();
    let taus: Vec<f64> = text.lines().filter_map(|l| l.rsplit_once(" tau ")).map(|(_, t)| t.parse().unwrap()).collect();
    assert_eq!(taus.len(), 3);
    assert!(taus.iter().all(|t| t.abs() < 0.05), "{text}");
    assert!(pairs.iter().filter(|p| p["family"] == "independence").count() >= 1, "{pairs:?}");
    assert!(text.contains("log-likelihood"));
}

#[test]
fn copula_fit_recovers_truss_load_families() {
    let dir = TempDir::new().unwrap();
    let u = load_vine().sample(3000, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let path = p(&dir, "loads.csv");
    write_csv(&path, &["p1", "p2", "p3", "p4", "p5", "p6"], &u);
    let out = pceuq(&["copula-fit", "--data", s(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let tree1: Vec<&str> = text.lines().filter(|l| l.starts_with("tree 1 ")).collect();
    assert_eq!(tree1.len(), 5);
    let gumbel = tree1.iter().filter(|l| l.contains("gumbel")).count();
    assert!(gumbel * 2 > tree1.len(), "{text}");
}

#[test]
fn copula_fit_needs_two_columns() {
    let dir = TempDir::new().unwrap();
    let path = p(&dir, "one.csv");
    write_csv(&path, &["a"], &(0..20).map(|i| vec![i as f64]).collect::<Vec<_>>());
    let out = pceuq(&["copula-fit", "--data", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
}
