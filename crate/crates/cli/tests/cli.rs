use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fractree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractree"))
        .args(args)
        .env_remove("FRACTREE_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = fractree(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn camera() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera.pgm")
}

#[test]
fn generate_blocks_noise_ratio() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate-blocks", "--n", "2048", "--snr", "3", "--seed", "5", "--out", p(dir.path())]);
    let report = read_json(&dir.path().join("report.json"));
    let ratio = report["empirical_noise_ratio"].as_f64().unwrap();
    assert!((ratio - 1.0 / 3.0).abs() <= 0.02, "ratio {ratio}");
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["config"]["snr"], 3.0);
    assert_eq!(read_csv(&dir.path().join("noisy.csv")).len(), 2048);
}

#[test]
fn generate_blocks_infinite_snr_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate-blocks", "--n", "512", "--snr", "inf", "--out", p(dir.path())]);
    let clean = fs::read(dir.path().join("clean.csv")).unwrap();
    let noisy = fs::read(dir.path().join("noisy.csv")).unwrap();
    assert_eq!(clean, noisy);
    assert_eq!(read_json(&dir.path().join("report.json"))["config"]["snr"], "inf");
}

#[test]
fn generate_blocks_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        ok(&["generate-blocks", "--seed", "42", "--out", p(dir.path())]);
    }
    for f in ["clean.csv", "noisy.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let c = tempfile::tempdir().unwrap();
    ok(&["generate-blocks", "--seed", "43", "--out", p(c.path())]);
    assert_ne!(fs::read(a.path().join("noisy.csv")).unwrap(), fs::read(c.path().join("noisy.csv")).unwrap());
}

#[test]
fn seed_falls_back_to_environment() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["generate-blocks", "--seed", "9", "--out", p(a.path())]);
    let out = Command::new(env!("CARGO_BIN_EXE_fractree"))
        .args(["generate-blocks", "--out", p(b.path())])
        .env("FRACTREE_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(a.path().join("noisy.csv")).unwrap(), fs::read(b.path().join("noisy.csv")).unwrap());
}

#[test]
fn denoise_signal_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate-blocks", "--seed", "1", "--out", p(dir.path())]);
    let out = dir.path().join("den");
    let noisy = dir.path().join("noisy.csv");
    ok(&["denoise", "--input", p(&noisy), "--out", p(&out), "--beta", "0.1", "--prior-sigma", "10", "--wavelet", "haar"]);
    let recon = read_csv(&out.join("reconstruction.csv"));
    let clean = read_csv(&dir.path().join("clean.csv"));
    let noisy = read_csv(&noisy);
    let err = |x: &[f64]| x.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(err(&recon) < 0.5 * err(&noisy));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["config"]["beta"], 0.1);
    assert_eq!(report["config"]["sigma_noise"], "auto");
    let tree = read_json(&out.join("tree.json"));
    assert_eq!(tree["d"], 1);
    assert_eq!(tree["j_max"], 10);
    assert_eq!(tree["levels"][0][0], 1);
    let first = fs::read(out.join("reconstruction.csv")).unwrap();
    ok(&["denoise", "--input", dir.path().join("noisy.csv").to_str().unwrap(), "--out", p(&out), "--beta", "0.1", "--prior-sigma", "10"]);
    assert_eq!(first, fs::read(out.join("reconstruction.csv")).unwrap());
}

#[test]
fn noiseless_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate-blocks", "--n", "1000", "--snr", "inf", "--out", p(dir.path())]);
    let out = dir.path().join("den");
    let clean_path = dir.path().join("clean.csv");
    for prior in [
        vec!["--prior", "laplace", "--a", "1e-12"],
        vec!["--prior", "gauss", "--prior-sigma", "1e9"],
    ] {
        let mut args = vec!["denoise", "--input", p(&clean_path), "--out", p(&out), "--beta", "0.999999", "--sigma", "1e-3", "--wavelet", "db2"];
        args.extend(prior);
        ok(&args);
        let recon = read_csv(&out.join("reconstruction.csv"));
        let clean = read_csv(&clean_path);
        assert_eq!(recon.len(), 1000);
        let max = recon.iter().zip(&clean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(max < 1e-8, "max abs error {max}");
    }
}

#[test]
fn denoise_image_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("den");
    let camera = camera();
    ok(&[
        "denoise", "--input", p(&camera), "--out", p(&out), "--prior", "laplace", "--a", "1", "--beta", "0.2",
        "--wavelet", "db2", "--sigma", "0.02",
    ]);
    let raw = out.join("reconstruction.f64");
    assert_eq!(fs::metadata(&raw).unwrap().len(), 512 * 512 * 8);
    assert!(out.join("reconstruction.pgm").exists());
    let m = ok(&["metrics", "--reference", p(&camera), "--test", p(&out.join("reconstruction.pgm"))]);
    let report: Value = serde_json::from_slice(&m.stdout).unwrap();
    assert!(report["psnr"].as_f64().unwrap() > 30.0);
    assert!(report["ssim"].as_f64().unwrap() > 0.8);

    let same = ok(&["metrics", "--reference", p(&camera), "--test", p(&camera)]);
    let report: Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(report["psnr"], "inf");
    assert_eq!(report["ssim"], 1.0);

    let raw_metrics = dir.path().join("m.json");
    ok(&["metrics", "--reference", p(&raw), "--test", p(&raw), "--shape", "512x512", "--out", p(&raw_metrics)]);
    assert_eq!(read_json(&raw_metrics)["l2"], 0.0);
}

#[test]
fn sample_prior_draws() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sample-prior", "-d", "2", "--beta", "0.6", "--jmax", "5", "--samples", "3", "--seed", "2", "--out", p(dir.path())]);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["draws"].as_array().unwrap().len(), 3);
    assert_eq!(report["shape"]["rows"], 64);
    for i in 0..3 {
        assert_eq!(fs::metadata(dir.path().join(format!("draw_{i:03}.f64"))).unwrap().len(), 64 * 64 * 8);
        let tree = read_json(&dir.path().join(format!("tree_{i:03}.json")));
        assert_eq!(tree["d"], 2);
    }
    let again = tempfile::tempdir().unwrap();
    ok(&["sample-prior", "-d", "2", "--beta", "0.6", "--jmax", "5", "--samples", "3", "--seed", "2", "--out", p(again.path())]);
    assert_eq!(
        fs::read(dir.path().join("draw_002.f64")).unwrap(),
        fs::read(again.path().join("draw_002.f64")).unwrap()
    );
}

#[test]
fn analyze_reports_and_thread_independence() {
    let run = |threads: &str| {
        let out = ok(&["--threads", threads, "analyze", "extinction", "--beta", "0.75", "--jmax", "30", "--samples", "4000", "--seed", "3"]);
        String::from_utf8(out.stdout).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    let report: Value = serde_json::from_str(&one).unwrap();
    assert_eq!(report["config"]["kind"], "extinction");
    assert!((report["result"]["estimate"].as_f64().unwrap() - 1.0 / 9.0).abs() < 0.03);

    let out = ok(&["analyze", "norm-growth", "--beta", "0.7071", "--jmax", "8", "--samples", "100"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["levels"].as_array().unwrap().len(), 9);
    assert!(report["config"]["t"].as_f64().is_some());

    let out = ok(&["analyze", "dimension", "--beta", "0.3", "--jmax", "40", "--samples", "200"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["result"]["estimate"].is_null());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(fractree(&["denoise", "--input", p(&missing), "--out", p(dir.path())]).status.code(), Some(3));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1\nx\n").unwrap();
    assert_eq!(fractree(&["denoise", "--input", p(&bad), "--out", p(dir.path())]).status.code(), Some(3));
    let good = dir.path().join("good.csv");
    fs::write(&good, "1\n2\n3\n4\n").unwrap();
    assert_eq!(fractree(&["denoise", "--input", p(&good), "--out", p(dir.path()), "--beta", "1.5"]).status.code(), Some(2));
    assert_eq!(fractree(&["denoise", "--input", p(&good), "--out", p(dir.path()), "--sigma", "-1"]).status.code(), Some(2));
    assert_eq!(fractree(&["analyze", "extinction", "-d", "3"]).status.code(), Some(2));
    assert_eq!(fractree(&["--threads", "0", "analyze", "extinction"]).status.code(), Some(2));
    assert_eq!(fractree(&["bogus"]).status.code(), Some(2));
}
