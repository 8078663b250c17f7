//! Behavior of the `chrom-oed` binary: exit codes, determinism, the
//! skip-if-up-to-date logic and output schemas.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chrom-oed")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chrom-oed-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Small-but-real configuration: coarse solver grid, tiny surrogate, short
/// chains. Everything else falls back to the built-in defaults.
const TINY_CONFIG: &str = r#"
seed = 7

[solver]
n_cells = 48
dense_output_stride = 2

[surrogate]
n_tau = 2
n_c = 2
q = 5
n_time = 128

[eig]
m = 120
n_tau = 2
n_c = 2
n_s = 8

[dram]
chain_length = 1500
burn_in = 400
n_s = 8
"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_writes_curve_and_observations() {
    let dir = scratch("simulate");
    let cfg = write_config(&dir, TINY_CONFIG);
    let out = dir.join("out");
    let r = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        r.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );

    let curve = fs::read_to_string(out.join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash = "));
    assert_eq!(lines.next().unwrap(), "tau,c1_out,c2_out");
    assert!(curve.lines().count() > 100);

    let obs = fs::read_to_string(out.join("observations_ns8.csv")).unwrap();
    // header + hash + 8 schedule times
    assert_eq!(obs.lines().count(), 2 + 8);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn rerun_without_force_is_a_noop_and_with_force_is_identical() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, TINY_CONFIG);
    let out = dir.join("out");
    let args = [
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert!(run(&args).status.success());
    let first = fs::read(out.join("curve.csv")).unwrap();
    let first_obs = fs::read(out.join("observations_ns8.csv")).unwrap();

    // no-op rerun announces the skip
    let r = run(&args);
    assert!(r.status.success());
    assert!(
        String::from_utf8_lossy(&r.stderr).contains("up to date"),
        "expected skip message, got: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    assert_eq!(first, fs::read(out.join("curve.csv")).unwrap());

    // forced rerun reproduces the bytes exactly
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(run(&forced).status.success());
    assert_eq!(first, fs::read(out.join("curve.csv")).unwrap());
    assert_eq!(
        first_obs,
        fs::read(out.join("observations_ns8.csv")).unwrap()
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_config_exits_2() {
    let dir = scratch("badtoml");
    let cfg = write_config(&dir, "this is not toml = = =");
    let r = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        r.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn inconsistent_config_exits_2() {
    let dir = scratch("badvalue");
    // injection longer than the horizon
    let cfg = write_config(&dir, "[simulate]\ntau_inj = 20.0\n");
    let out = dir.join("out");
    let r = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        r.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_subcommand_exits_2() {
    let r = run(&["frobnicate"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn synth_data_curve_is_schedule_independent() {
    let dir = scratch("synth");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let cfg_a = dir.join("a.toml");
    let cfg_b = dir.join("b.toml");
    fs::write(&cfg_a, format!("{TINY_CONFIG}\n[schedule]\nn_s = [8]\n")).unwrap();
    fs::write(
        &cfg_b,
        format!("{TINY_CONFIG}\n[schedule]\nn_s = [15, 20]\n"),
    )
    .unwrap();
    assert!(run(&[
        "synth-data",
        "--config",
        cfg_a.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "synth-data",
        "--config",
        cfg_b.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap()
    ])
    .status
    .success());
    // same theta, design and solver config: the dense curves agree byte for
    // byte after the hash line
    let strip = |p: &Path| -> String {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(&out_a.join("synth_curve.csv")),
        strip(&out_b.join("synth_curve.csv"))
    );
    assert!(out_b.join("synth_obs_ns15.csv").exists());
    assert!(out_b.join("synth_obs_ns20.csv").exists());
    // K = 2 N_s values split over N_s rows of two components each
    let obs15 = fs::read_to_string(out_b.join("synth_obs_ns15.csv")).unwrap();
    assert_eq!(obs15.lines().count(), 2 + 15);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn train_then_utility_map_and_posterior_roundtrip() {
    let dir = scratch("pipeline");
    let cfg = write_config(&dir, TINY_CONFIG);
    let out = dir.join("out");
    let c = cfg.to_str().unwrap();
    let o = out.to_str().unwrap();

    let r = run(&["train-surrogate", "--config", c, "--out", o]);
    assert!(
        r.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    assert!(out.join("surrogate/manifest.json").exists());
    assert!(out.join("surrogate/node_001_001.json").exists());
    assert!(out.join("validation.json").exists());

    // resumed training loads every node instead of solving again
    let r = run(&["train-surrogate", "--config", c, "--out", o]);
    assert!(r.status.success());
    let training: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("training.json")).unwrap()).unwrap();
    assert_eq!(
        training["nodes_trained"], 0,
        "expected full resume: {training}"
    );

    let r = run(&[
        "utility-map",
        "--config",
        c,
        "--out",
        o,
        "--backend",
        "surrogate",
    ]);
    assert!(
        r.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    let map = fs::read_to_string(out.join("utility_surrogate.csv")).unwrap();
    assert_eq!(map.lines().count(), 2 + 4, "2x2 lattice rows");
    let argmax: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("argmax_surrogate.json")).unwrap())
            .unwrap();
    assert!(argmax["argmax"]["u"].as_f64().unwrap().is_finite());

    let r = run(&[
        "posterior",
        "--config",
        c,
        "--out",
        o,
        "--backend",
        "solver",
    ]);
    assert!(
        r.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&r.stderr)
    );
    let chain = fs::read_to_string(out.join("chain_solver.csv")).unwrap();
    assert_eq!(chain.lines().nth(1).unwrap(), "b1,b2,qs,ntp,logpost");
    assert_eq!(chain.lines().count(), 2 + 1100, "kept samples");
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.join("posterior_summary_solver.json")).unwrap(),
    )
    .unwrap();
    let rate = summary["acceptance_rate"].as_f64().unwrap();
    assert!(rate > 0.0 && rate < 1.0);
    fs::remove_dir_all(&dir).ok();
}
