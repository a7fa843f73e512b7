use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("ising-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn k4_file(dir: &Path) -> PathBuf {
    let p = dir.join("k4.edges");
    std::fs::write(&p, "4 3\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    p
}

#[test]
fn thresholds_example() {
    let v = json_stdout(&ising(&["thresholds", "--delta", "4", "--beta", "0.7931"]));
    let bu = v["beta_u"].as_f64().unwrap();
    assert!((bu - 2f64.ln()).abs() < 1e-9);
    let lu = v["lambda_u"].as_f64().unwrap();
    assert!(lu > 1.01 && lu < 1.08, "{lu}");
}

#[test]
fn thresholds_below_uniqueness_has_no_lambda_u() {
    let v = json_stdout(&ising(&["thresholds", "--delta", "4", "--beta", "0.5"]));
    assert!(v["lambda_u"].is_null());
}

#[test]
fn landscape_example_has_three_critical_points() {
    let dir = scratch("landscape");
    let out = dir.join("out");
    let v = json_stdout(&ising(&[
        "landscape", "--delta", "4", "--beta", "0.7931", "--lambda", "1.01", "--out", out.to_str().unwrap(),
    ]));
    let cps = v["critical_points"].as_array().unwrap();
    assert_eq!(cps.len(), 3);
    let kinds: Vec<&str> = cps.iter().map(|c| c["classification"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["local-max", "local-min", "local-max"]);
    let csv = std::fs::read_to_string(out.join("critical_points.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(out.join("landscape.csv").exists());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "landscape");
    assert_eq!(manifest["config"]["lambda"], "1.01");
}

#[test]
fn exactcheck_k4_passes() {
    let dir = scratch("exactcheck");
    let g = k4_file(&dir);
    let out = dir.join("out");
    let v = json_stdout(&ising(&[
        "exactcheck", "--graph", g.to_str().unwrap(), "--k", "2", "--out", out.to_str().unwrap(),
    ]));
    assert_eq!(v["all_pass"], true);
    assert!(v["checks"].as_u64().unwrap() > 20);
    assert!(out.join("exactcheck.json").exists());
}

#[test]
fn exactcheck_on_a_cycle_passes_for_every_k() {
    for k in ["1", "2", "3"] {
        let v = json_stdout(&ising(&["exactcheck", "--family", "cycle", "--n", "6", "--k", k, "--betas", "0,0.7"]));
        assert_eq!(v["all_pass"], true, "k = {k}");
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = scratch("validation");
    let g = k4_file(&dir);
    let g = g.to_str().unwrap();
    let cases: &[&[&str]] = &[
        &["exactcheck", "--graph", g, "--k", "5"],
        &["exactcheck", "--graph", g, "--k", "2", "--betas", "-0.5"],
        &["spectra", "--graph", g, "--chain", "kawasaki", "--beta", "-1", "--k", "2"],
        &["spectra", "--graph", g, "--chain", "kl-downup", "--beta", "0.5", "--k", "2", "--ell", "2"],
        &["simulate", "--graph", g, "--chain", "glauber", "--beta", "0.5"],
        &["simulate", "--graph", g, "--chain", "metropolis", "--beta", "0.5", "--lambda", "1"],
        &["thresholds", "--delta", "4"],
        &["metastability", "--mode", "kawasaki-union", "--delta", "4", "--beta", "0.5", "--eta", "0", "--n", "100"],
    ];
    for args in cases {
        let out = ising(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn oversized_exact_instance_exits_3() {
    let out = ising(&["exactcheck", "--family", "complete", "--n", "30", "--k", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let out = ising(&["exactcheck", "--family", "cycle", "--n", "12", "--k", "2", "--cap", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_round_trip() {
    let dir = scratch("config");
    let args = [
        "simulate", "--family", "cycle", "--n", "8", "--chain", "kawasaki", "--beta", "0.4", "--k", "3", "--steps", "500",
        "--seed", "7",
    ];
    let mut dump_args = args.to_vec();
    dump_args.push("--dump-config");
    let dumped = ising(&dump_args);
    assert!(dumped.status.success());
    let text = String::from_utf8(dumped.stdout).unwrap();
    assert!(text.starts_with("subcommand = simulate\n"));
    assert!(text.contains("seed = 7\n"));
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, &text).unwrap();

    let again = ising(&["--config", cfg.to_str().unwrap(), "--dump-config"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);

    let direct = ising(&args);
    let from_file = ising(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(direct.stdout, from_file.stdout);

    let out = dir.join("out");
    let with_out = ising(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(with_out.status.success(), "{}", String::from_utf8_lossy(&with_out.stderr));
    assert_eq!(with_out.stdout, direct.stdout);
    assert!(out.join("trace.csv").exists());

    // command-line flags override the file
    let overridden = ising(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "8", "--dump-config"]);
    let t = String::from_utf8(overridden.stdout).unwrap();
    assert!(t.contains("seed = 8\n"), "{t}");
}

#[test]
fn config_with_unknown_key_is_rejected() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "subcommand = thresholds\ndelta = 4\nbeta = 0.8\ncolour = blue\n").unwrap();
    assert_eq!(ising(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn identical_seeds_give_identical_outputs() {
    let dir = scratch("determinism");
    let run = |tag: &str, threads: &str, seed: &str| {
        let out = dir.join(tag);
        let o = ising(&[
            "simulate", "--family", "random-regular", "--n", "30", "--degree", "3", "--chain", "glauber", "--beta", "0.6",
            "--lambda", "1.02", "--steps", "3000", "--stride", "30", "--replicas", "5", "--threads", threads, "--seed", seed,
            "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (o.stdout, std::fs::read(out.join("trace.csv")).unwrap())
    };
    let a = run("a", "1", "11");
    let b = run("b", "3", "11");
    let c = run("c", "1", "12");
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
}

#[test]
fn metastability_runs_are_deterministic() {
    let args = [
        "metastability", "--delta", "4", "--beta", "0.8", "--lambda", "1.03", "--n", "100", "--replicas", "3", "--seed",
        "5",
    ];
    let a = ising(&args);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    let b = ising(&threaded);
    let v = json_stdout(&a);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(v["replicas"].as_array().unwrap().len(), 3);
}

#[test]
fn failed_run_leaves_no_partial_outputs() {
    let dir = scratch("partial");
    let out = dir.join("never");
    let o = ising(&[
        "exactcheck", "--family", "complete", "--n", "30", "--k", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn spectra_reports_gap_and_mixing() {
    let v = json_stdout(&ising(&[
        "spectra", "--family", "complete", "--n", "4", "--chain", "kawasaki", "--beta", "0", "--k", "2",
    ]));
    assert_eq!(v["states"], 6);
    let gap = v["gap"].as_f64().unwrap();
    assert!(gap > 0.0 && gap <= 1.0);
    assert!(v["lazy_mixing_time"].as_u64().unwrap() >= 1);
    let top = v["extra"]["influence"]["largest_eigenvalue"].as_f64().unwrap();
    assert!((top - 2.0 / 3.0).abs() < 1e-9, "{top}");
}

#[test]
fn graph_gen_round_trips_through_simulate() {
    let dir = scratch("graphgen");
    let out = dir.join("g");
    let v = json_stdout(&ising(&[
        "graph-gen", "--n", "12", "--delta", "3", "--simple", "--copies", "2", "--out", out.to_str().unwrap(),
    ]));
    assert_eq!(v["n"], 24);
    assert_eq!(v["edges"], 36);
    let g = out.join("graph.edges");
    let s = json_stdout(&ising(&[
        "simulate", "--graph", g.to_str().unwrap(), "--chain", "kawasaki", "--beta", "0.3", "--k", "12", "--steps", "100",
    ]));
    assert_eq!(s["n"], 24);
}

#[test]
fn phase_diagram_csv_has_requested_rows() {
    let dir = scratch("phase");
    let out = dir.join("p");
    json_stdout(&ising(&[
        "phase-diagram", "--delta", "3", "--beta-min", "0.5", "--beta-max", "1.5", "--points", "11", "--out",
        out.to_str().unwrap(),
    ]));
    let csv = std::fs::read_to_string(out.join("phase_diagram.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "beta,lambda_u,lambda_a_bar,eta_c,eta_u,eta_a_bar");
    assert_eq!(lines.count(), 11);
}
