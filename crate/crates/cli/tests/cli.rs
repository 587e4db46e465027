use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_liouville-lab"));
    c.env_remove("LIOUVILLE_LAB_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn pair_report() {
    let r = json(&["pair", "--lambda1", "2", "--R", "1"]);
    assert_eq!(r["command"], "pair");
    assert_eq!(r["inputs"]["R"], 1.0);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    let p = &r["payload"];
    assert!((num(&p["pair"]["lambda2"]) - 4.0).abs() < 1e-12);
    assert!((num(&p["total_mass"]) - 8.0 * PI).abs() < 1e-12);
    assert_eq!(p["expected_total"]["symbol"], "8*pi");
    let z = p["cap_heights"].as_array().unwrap();
    assert!((num(&z[0]) + num(&z[1])).abs() < 1e-12);
    // masses are the roots of m² − 8πm + 2β
    let m: Vec<f64> = p["masses"].as_array().unwrap().iter().map(num).collect();
    let beta = num(&p["boundary_beta"]);
    for mi in m {
        assert!((mi * mi - 8.0 * PI * mi + 2.0 * beta).abs() < 1e-9);
    }
}

#[test]
fn constant_kernel_shoot_gives_four() {
    let r = json(&["shoot", "--kernel", "const", "--a0", "-1.5"]);
    let s = &r["payload"]["summary"];
    assert!((num(&s["beta"]) - 4.0).abs() < 1e-8);
    assert_eq!(s["converged"], true);
}

#[test]
fn target_beta_hits_target() {
    let r = json(&["shoot", "--kernel", "poly", "--l", "1", "--target-beta", "5"]);
    let s = &r["payload"]["summary"];
    assert!((num(&s["beta"]) - 5.0).abs() < 1e-6);
}

#[test]
fn sweep_csv_stays_in_band() {
    // (1 + r²)^l with l = 1: radial β lies in (2l + 2, 4l + 4)
    let out = run(&["sweep", "--kernel", "poly", "--l", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a0,beta,pohozaev_residual,tail_slope"));
    let betas: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(betas.len(), 65);
    assert!(betas.iter().all(|&b| b > 4.0 && b < 8.0), "{betas:?}");
    assert!(betas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn parallelism_does_not_change_results() {
    let a = run(&["sweep", "--kernel", "ring", "--l", "0.5", "--steps", "17", "--parallelism", "1"]);
    let b = run(&["sweep", "--kernel", "ring", "--l", "0.5", "--steps", "17", "--parallelism", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["sci-verify", "--lambda1", "1.3", "--R", "1.1", "--eps", "0.2"];
    let mut a = json(&args);
    let mut b = json(&args);
    assert_eq!(a["payload"], b["payload"]);
    a["wall_time"] = Value::Null;
    b["wall_time"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["pair", "--lambda1", "2"]).status.code(), Some(64));
    let degenerate = run(&["pair", "--lambda1", &8f64.sqrt().to_string(), "--R", "1"]);
    assert_eq!(degenerate.status.code(), Some(2));
    let missing = run(&["dichotomy", "--lambda1", "2", "--R", "1", "--psi", "/nonexistent/psi.csv"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["shoot", "--grid-nodes", "8"]).status.code(), Some(64));
    // a constant is not an Onsager solution once γ ≠ 0
    let onsager = run(&["transform", "--kind", "onsager", "--alpha", "50.26548245743669", "--gamma", "0.5"]);
    assert_eq!(onsager.status.code(), Some(2));
}

#[test]
fn config_file_and_env_feed_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# coarse\nr_max = 200\ngrid_nodes = 128\n").unwrap();
    let base = json(&["bubble"]);
    let from_flag = json(&["bubble", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_flag["config"]["r_max"], 200.0);
    assert_ne!(base["config_hash"], from_flag["config_hash"]);

    let out = bin()
        .env("LIOUVILLE_LAB_CONFIG", &cfg)
        .arg("bubble")
        .output()
        .unwrap();
    let from_env: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(from_env["config_hash"], from_flag["config_hash"]);

    // flags override the file
    let over = json(&["bubble", "--config", cfg.to_str().unwrap(), "--grid-nodes", "401", "--r-max", "1000"]);
    assert_eq!(over["config_hash"], base["config_hash"]);

    std::fs::write(&cfg, "nonsense = 3\n").unwrap();
    assert_eq!(run(&["bubble", "--config", cfg.to_str().unwrap()]).status.code(), Some(64));
}

fn write_bubble(path: &Path, lambda: &str, r: &str) {
    let out = run(&[
        "bubble", "--lambda", lambda, "--R", r, "--format", "csv", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // the JSON report still goes to stdout
    let _: Value = serde_json::from_slice(&out.stdout).unwrap();
}

#[test]
fn bubble_csv_feeds_dichotomy() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("u2.csv");
    let large = dir.path().join("u4.csv");
    write_bubble(&small, "2", "1");
    write_bubble(&large, "4", "1");
    let text = std::fs::read_to_string(&small).unwrap();
    assert!(text.starts_with("r,value,derivative\n"));

    let lo = json(&["dichotomy", "--lambda1", "2", "--R", "1", "--psi", small.to_str().unwrap()]);
    assert_eq!(lo["payload"]["report"]["verdict"], "LOWER");
    let m = num(&lo["payload"]["report"]["m"]);
    assert!((m - 8.0 * PI / 3.0).abs() < 1e-8);

    let hi = json(&["dichotomy", "--lambda1", "2", "--R", "1", "--psi", large.to_str().unwrap()]);
    assert_eq!(hi["payload"]["report"]["verdict"], "UPPER");
}

#[test]
fn every_command_runs() {
    for args in [
        vec!["bubble", "--lambda", "0.7"],
        vec!["bol", "--lambda", "1.2", "--shift", "0.3"],
        vec!["eigen", "--lambda", "1", "--mass", "12.566370614359172"],
        vec!["transform", "--kind", "mt", "--alpha", "2", "--value", "0.1"],
        vec!["transform", "--kind", "onsager", "--alpha", "50.26548245743669", "--gamma", "0"],
        vec!["jalpha", "--alpha", "0.5", "--eps", "0.3"],
        vec!["sci-verify"],
    ] {
        let r = json(&args);
        assert_eq!(r["command"], args[0]);
        assert!(r["payload"].is_object());
    }
}
