use soslab::experiments::RunManifest;
use std::path::Path;
use std::process::{Command, Output};

fn soslab(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_soslab"));
    c.args(args).env_remove("SOSLAB_OUTPUT_DIR");
    if let Some(d) = out_env {
        c.env("SOSLAB_OUTPUT_DIR", d);
    }
    c.output().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

const SMALL_MIN_RHO: &str = "[model]\nsizes = [8]\n[sampling]\nsamples = 4\nburn_in = 20\nthin = 2\n";

#[test]
fn exit_codes() {
    assert_eq!(soslab(&["--help"], None).status.code(), Some(0));
    assert_eq!(soslab(&["no-such-command"], None).status.code(), Some(2));
    assert_eq!(soslab(&["tension", "--beta", "2", "--dir", "x"], None).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(soslab(&["enumerate", "--width", "6", "--height", "6", "--out", out], None).status.code(), Some(3));
    let missing = tmp.path().join("missing.toml");
    assert_eq!(soslab(&["exp-min-rho", "--config", missing.to_str().unwrap(), "--out", out], None).status.code(), Some(2));
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[model]\nbogus = 1\n").unwrap();
    assert_eq!(soslab(&["exp-min-rho", "--config", bad.to_str().unwrap(), "--out", out], None).status.code(), Some(2));
}

#[test]
fn tension_rows_include_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let o = soslab(&["tension", "--beta", "2", "--dir", "1,0", "--nmax", "4", "--out", tmp.path().to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&tmp.path().join("tension.csv"));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let n_col = header.iter().position(|h| *h == "N").unwrap();
    let v_col = header.iter().position(|h| *h == "value").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let oracle = rows.iter().find(|r| r[n_col] == "0").unwrap();
    let tau: f64 = oracle[v_col].parse().unwrap();
    assert!((tau - 1.7268442843687422).abs() < 1e-6);
    assert!(tmp.path().join("manifest.json").exists());
}

#[test]
fn reruns_are_byte_identical_and_manifest_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, SMALL_MIN_RHO).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = soslab(&["exp-min-rho", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["min_rho_samples.csv", "min_rho_quantiles.csv"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let m = RunManifest::from_json(&read(&a.join("manifest.json"))).unwrap();
    assert_eq!(m.experiment, "exp-min-rho");
    assert!(m.outputs.contains_key("min_rho_quantiles.csv"));
    assert!(m.verify(&a).unwrap().is_empty());
    std::fs::write(a.join("min_rho_samples.csv"), "tampered\n").unwrap();
    assert_eq!(m.verify(&a).unwrap(), vec!["min_rho_samples.csv".to_string()]);
}

#[test]
fn output_dir_environment_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[oz]\ndirections = []\n").unwrap();
    let env_dir = tmp.path().join("env");
    let flag_dir = tmp.path().join("flag");
    let o = soslab(&["exp-oz-battery", "--config", cfg.to_str().unwrap(), "--out", flag_dir.to_str().unwrap()], Some(&env_dir));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!flag_dir.exists());
    let csv = read(&env_dir.join("oz_battery.csv"));
    assert_eq!(csv.lines().count(), 1, "empty battery has only a header");
    assert!(csv.starts_with("direction_x,direction_y,check,value,tolerance,verdict,detail"));
}

#[test]
fn sample_writes_heights_and_contours() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let args = ["sample", "--width", "6", "--height", "5", "--boundary", "dobrushin", "--no-floor", "--sweeps", "50", "--seed", "3", "--out", out];
    assert!(soslab(&args, None).status.success());
    let heights = read(&tmp.path().join("heights.csv"));
    assert!(heights.lines().count() >= 30);
    assert!(tmp.path().join("contours_h1.txt").exists());
    let first = heights.clone();
    assert!(soslab(&args, None).status.success());
    assert_eq!(read(&tmp.path().join("heights.csv")), first);
}
