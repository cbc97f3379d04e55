//! End-to-end checks of the binary: file schemas, exit codes, determinism,
//! and agreement with direct library calls.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lipmat"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lipmat_cli_{tag}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_toy_samples(path: &Path) {
    fs::write(path, "x_1,x_2,f\n0.0,0.0,0.0\n1.0,0.0,3.0\n").unwrap();
}

#[test]
fn estimate_writes_rank_one_h() {
    let dir = workdir("estimate");
    let samples = dir.join("toy.csv");
    write_toy_samples(&samples);
    let out = dir.join("lip.json");
    let status = bin()
        .args(["estimate"])
        .arg(&samples)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["m"], 2);
    let h00 = v["H"][0][0].as_f64().unwrap();
    let h11 = v["H"][1][1].as_f64().unwrap();
    assert!((h00 - 9.0).abs() < 1e-4, "H00 = {h00}");
    assert!(h11.abs() < 1e-6);
    assert_eq!(v["rank"], 1);
}

#[test]
fn epsilon_with_gradients_is_usage_error() {
    let dir = workdir("epsgrad");
    let samples = dir.join("toy.csv");
    write_toy_samples(&samples);
    let grads = dir.join("g.csv");
    fs::write(&grads, "x_1,x_2,g_1,g_2\n0.0,0.0,1.0,0.0\n").unwrap();
    let status = bin()
        .args(["estimate"])
        .arg(&samples)
        .arg("--gradients")
        .arg(&grads)
        .args(["--epsilon", "0.5"])
        .current_dir(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn deflate_reports_rank_one_on_ridge_data() {
    let dir = workdir("deflate");
    // Gradients of f = g(a^T x) span only span(a).
    let samples = dir.join("s.csv");
    fs::write(&samples, "x_1,x_2,f\n0.0,0.0,0.0\n0.6,0.8,1.0\n").unwrap();
    let grads = dir.join("g.csv");
    let mut g = String::from("x_1,x_2,g_1,g_2\n");
    for k in 0..8 {
        let t = -1.0 + 0.25 * k as f64;
        let scale = 1.0 + 0.1 * k as f64;
        g.push_str(&format!("{t},{},{},{}\n", -t, 0.6 * scale, 0.8 * scale));
    }
    fs::write(&grads, g).unwrap();
    let out = dir.join("lip.json");
    let status = bin()
        .args(["estimate"])
        .arg(&samples)
        .arg("--gradients")
        .arg(&grads)
        .arg("--deflate")
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rank"], 1);
}

#[test]
fn uncertainty_round_trips_estimate_output() {
    let dir = workdir("uncround");
    let samples = dir.join("toy.csv");
    write_toy_samples(&samples);
    let lip = dir.join("lip.json");
    assert!(bin()
        .args(["estimate"])
        .arg(&samples)
        .arg("-o")
        .arg(&lip)
        .status()
        .unwrap()
        .success());
    let points = dir.join("pts.csv");
    fs::write(&points, "x_1,x_2\n0.5,0.5\n-0.25,0.75\n").unwrap();
    let out = dir.join("unc.csv");
    assert!(bin()
        .args(["uncertainty"])
        .arg("--lipschitz")
        .arg(&lip)
        .arg("--samples")
        .arg(&samples)
        .arg("--points")
        .arg(&points)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    // The CSV must match the direct library path bit-for-bit.
    let lm: lipmat::LipschitzMatrix =
        serde_json::from_str(&fs::read_to_string(&lip).unwrap()).unwrap();
    let s = lipmat::io::read_samples_csv(&samples).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x_1,x_2,lower,central,upper,gap");
    for (line, x) in lines.zip([[0.5, 0.5], [-0.25, 0.75]]) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let iv = lipmat::uncertainty::interval_at(&x, &s, &lm).unwrap();
        assert_eq!(cells[2].to_bits(), iv.lower.to_bits());
        assert_eq!(cells[4].to_bits(), iv.upper.to_bits());
        assert_eq!(cells[3].to_bits(), ((iv.lower + iv.upper) / 2.0).to_bits());
        assert_eq!(cells[5].to_bits(), (iv.upper - iv.lower).to_bits());
    }
}

#[test]
fn shadow_emits_101_rows_and_sidecar() {
    let dir = workdir("shadow");
    // 10 samples of sin(3 pi x) via bench, then shadow over [-1, 1].
    let samples = dir.join("sine.csv");
    assert!(bin()
        .args(["bench", "--function", "sine1d", "--count", "10", "--seed", "3"])
        .arg("--samples")
        .arg(&samples)
        .status()
        .unwrap()
        .success());
    let lip = dir.join("lip.json");
    assert!(bin()
        .args(["estimate"])
        .arg(&samples)
        .arg("-o")
        .arg(&lip)
        .status()
        .unwrap()
        .success());
    let out = dir.join("shadow.csv");
    assert!(bin()
        .args(["shadow"])
        .arg("--lipschitz")
        .arg(&lip)
        .arg("--samples")
        .arg(&samples)
        .arg("-o")
        .arg(&out)
        .args(["--seed", "5"])
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 102, "header + 101 alpha rows");
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("shadow.json")).unwrap()).unwrap();
    assert_eq!(sidecar["schema_version"], "1");
    assert_eq!(sidecar["u"][0], 1.0);
}

#[test]
fn design_adaptive_shape_contract() {
    let dir = workdir("design");
    let out = dir.join("design.csv");
    assert!(bin()
        .args([
            "design",
            "--mode",
            "adaptive",
            "--count",
            "5",
            "--function",
            "corrugated_roof",
            "--seed",
            "9",
        ])
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x_1,x_2,f");
    assert_eq!(lines.count(), 5);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("design.json")).unwrap()).unwrap();
    assert_eq!(sidecar["fill_trace"].as_array().unwrap().len(), 5);
    assert_eq!(sidecar["mode"], "adaptive");
}

#[test]
fn cover_sweep_emits_requested_rows() {
    let dir = workdir("cover");
    let domain = dir.join("domain.json");
    fs::write(
        &domain,
        r#"{"dim":2,"lower":[-1.0,-1.0],"upper":[1.0,1.0]}"#,
    )
    .unwrap();
    let out = dir.join("cover.csv");
    assert!(bin()
        .args(["cover", "--scalar", "4.0", "--eps-count", "20"])
        .arg("--domain")
        .arg(&domain)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 21, "header + 20 sweep rows");
    assert_eq!(
        text.lines().next().unwrap(),
        "epsilon,count,exact,slope,smoothed_slope"
    );
}

#[test]
fn reduce_writes_subspace_and_shadow() {
    let dir = workdir("reduce");
    let samples = dir.join("s.csv");
    let grads = dir.join("g.csv");
    assert!(bin()
        .args([
            "bench",
            "--function",
            "corrugated_roof",
            "--count",
            "40",
            "--seed",
            "2",
            "--normalized",
        ])
        .arg("--samples")
        .arg(&samples)
        .arg("--gradients")
        .arg(&grads)
        .status()
        .unwrap()
        .success());
    let lip = dir.join("lip.json");
    assert!(bin()
        .args(["estimate"])
        .arg(&samples)
        .arg("--gradients")
        .arg(&grads)
        .arg("-o")
        .arg(&lip)
        .status()
        .unwrap()
        .success());
    let out = dir.join("reduce.json");
    assert!(bin()
        .args(["reduce", "-n", "1"])
        .arg("--lipschitz")
        .arg(&lip)
        .arg("--samples")
        .arg(&samples)
        .arg("--gradients")
        .arg(&grads)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["u"].as_array().unwrap().len(), 2);
    assert!(v["angles_vs_opg"][0].as_f64().unwrap() < 0.3);
    assert!(dir.join("reduce.csv").exists());
}

#[test]
fn outputs_are_deterministic_for_fixed_seed() {
    let dir = workdir("determinism");
    let run = |tag: &str| -> String {
        let samples = dir.join(format!("{tag}.csv"));
        assert!(bin()
            .args(["bench", "--function", "otl_circuit", "--count", "12", "--seed", "42", "--normalized"])
            .arg("--samples")
            .arg(&samples)
            .status()
            .unwrap()
            .success());
        fs::read_to_string(&samples).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = workdir("config");
    let samples = dir.join("toy.csv");
    write_toy_samples(&samples);
    let out_cfg = dir.join("from_config.json");
    let cfg = dir.join("est.json");
    fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "samples": samples,
            "output": out_cfg,
        }))
        .unwrap(),
    )
    .unwrap();
    // Config supplies every argument.
    assert!(bin()
        .args(["estimate", "--config"])
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    assert!(out_cfg.exists());
    // A flag overrides the config's output path.
    let out_flag = dir.join("from_flag.json");
    assert!(bin()
        .args(["estimate", "--config"])
        .arg(&cfg)
        .arg("-o")
        .arg(&out_flag)
        .status()
        .unwrap()
        .success());
    assert!(out_flag.exists());
    // Unknown keys are rejected.
    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"samples":"x.csv","bogus":1}"#).unwrap();
    let status = bin()
        .args(["estimate", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn bad_csv_exits_one_with_line_number() {
    let dir = workdir("badcsv");
    let samples = dir.join("bad.csv");
    fs::write(&samples, "x_1,f\n0.0,1.0\nnot_a_number,2.0\n").unwrap();
    let output = bin().args(["estimate"]).arg(&samples).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn version_mentions_schema() {
    let output = bin().arg("--version").output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("schema 1"), "version: {stdout}");
}

#[test]
fn bench_lists_catalog() {
    let output = bin().arg("bench").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    for name in ["otl_circuit", "piston", "borehole", "wing_weight", "golinski_volume"] {
        assert!(stdout.contains(name), "missing {name}");
    }
}
