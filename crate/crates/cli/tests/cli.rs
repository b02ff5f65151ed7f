use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use occlusion_cli::config::ExperimentConfig;
use occlusion_cli::output::SUMMARY_HEADER;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_occlusion"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn desk_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml")
}

/// A tiny GMM configuration written into `dir`.
fn small_gmm(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("small.toml");
    let text = format!(
        "version = 1\nseed = 5\n{extra}\n[run]\nsteps = 600\nworkers = 2\nacf_max_lag = 5\n[gmm]\nreplications = 2\ndimensions = [1, 3]\n"
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn zero_steps_is_a_config_error() {
    let out = run(&["gmm", "--steps", "0", "--out", "/nonexistent/never"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps"));
}

#[test]
fn more_communities_than_vertices_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "version = 1\n[ising]\nvertices = [4]\ncommunities = [5]\n").unwrap();
    let out = run(&["ising", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("k > N"));
}

#[test]
fn unknown_keys_and_bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "version = 1\n[gmm]\ndimension = [1]\n").unwrap();
    assert_eq!(code(&run(&["gmm", "--config", cfg.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["gmm", "--steps", "many"])), 1);
    assert_eq!(code(&run(&["gmm", "--deterministic", "--seconds", "1"])), 1);
    assert_eq!(code(&run(&["gmm", "--config", "/no/such/file.toml"])), 1);
}

#[test]
fn deterministic_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_gmm(dir.path(), "");
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    for out in &outs {
        let o = run(&[
            "gmm",
            "--config",
            cfg.to_str().unwrap(),
            "--deterministic",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&outs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 3);
    for name in names {
        let a = fs::read(outs[0].join(&name)).unwrap();
        let b = fs::read(outs[1].join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
    }
}

#[test]
fn summary_schema_and_lag_one_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_gmm(dir.path(), "deterministic = true");
    let out = dir.path().join("out");
    let o = run(&["gmm", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER.join(","));
    // 2 dimensions x 2 replications x 2 estimators
    assert_eq!(text.lines().count(), 1 + 8);
    let trace = fs::read_to_string(out.join("trace_gmm_d1_rep0.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "t,region,f_x,s,f_z");
    assert_eq!(trace.lines().count(), 601);

    let mut r = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let rows: Vec<occlusion_cli::output::SummaryRow> =
        r.deserialize().map(|x| x.unwrap()).collect();
    for pair in rows.chunks(2).filter(|p| p[0].d == Some(1)) {
        assert!(pair[1].lag1_acf.unwrap() < pair[0].lag1_acf.unwrap());
        assert!(pair[0].elapsed_seconds.is_none());
    }
}

#[test]
fn wall_clock_mode_records_elapsed_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_gmm(dir.path(), "");
    let out = dir.path().join("out");
    let o = run(&[
        "gmm",
        "--config",
        cfg.to_str().unwrap(),
        "--seconds",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    for row in r.deserialize::<occlusion_cli::output::SummaryRow>() {
        assert!(row.unwrap().elapsed_seconds.unwrap() >= 0.05);
    }
}

#[test]
fn ising_run_writes_graph_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ising.toml");
    fs::write(
        &cfg,
        "version = 1\ndeterministic = true\n[run]\nsteps = 300\nworkers = 2\nacf_max_lag = 3\n\
         [ising]\nreplications = 2\nvertices = [6]\ncommunities = [2]\ncalibration_steps = 200\n\
         kernels = [\"wolff\"]\n[[ising.temperatures]]\nbeta = 0.5\nepsilon = 0.2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["ising", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let graph = fs::read(out.join("graph_k2_n6.txt")).unwrap();
    let list = occlusion_core::ising::read_edge_list(graph.as_slice()).unwrap();
    assert_eq!(list.vertices, 6);
    assert_eq!(list.membership.unwrap().len(), 6);
    assert!(out.join("trace_ising_wolff_k2_n6_b0.5_rep0.csv").exists());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let o = run(&["verify"]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("ideal variance formula vs enumeration"));
    assert!(table.lines().skip(1).all(|l| l.contains("PASS") || l.contains("diagnostic")));

    let o = run(&["verify", "--negate-correction"]);
    assert_eq!(code(&o), 3);
    let table = String::from_utf8_lossy(&o.stdout);
    let line = table
        .lines()
        .find(|l| l.starts_with("occluded formula, alpha = 0"))
        .unwrap();
    assert!(line.contains("FAIL") && line.contains("blocking"));
}

fn write_trace(path: &Path, fx: &[f64], fz: &[f64]) {
    let mut text = String::from("t,region,f_x,s,f_z\n");
    for (t, (a, b)) in fx.iter().zip(fz).enumerate() {
        text.push_str(&format!("{t},0,{a},0,{b}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn acf_of_iid_trace_vanishes_beyond_lag_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(17);
    let n = 20_000;
    let fx: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let fz = vec![1.5; n];
    let trace = dir.path().join("trace_iid.csv");
    write_trace(&trace, &fx, &fz);
    let o = run(&[
        "acf",
        trace.to_str().unwrap(),
        "--max-lag",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(dir.path().join("acf.csv")).unwrap();
    let rows: Vec<occlusion_cli::output::AcfRow> = r.deserialize().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].acf_chain, 1.0);
    assert_eq!(rows[0].acf_occluded, 1.0);
    for row in &rows[1..] {
        assert!(row.acf_chain.abs() < 4.0 / (n as f64).sqrt(), "lag {}", row.lag);
        assert_eq!(row.occluded_degenerate, 1);
        assert_eq!(row.chain_degenerate, 0);
    }
}

#[test]
fn malformed_trace_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.csv");
    fs::write(&trace, "t,region,f_x,s,f_z\n0,0,1,0,1\n1,0,1,0,1\n2,0,oops,0,1\n").unwrap();
    let o = run(&["acf", trace.to_str().unwrap(), "--max-lag", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn desk_config_round_trips() {
    let cfg = ExperimentConfig::load(&desk_config()).unwrap();
    let text = cfg.to_toml().unwrap();
    let again = ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_toml().unwrap(), text);
    cfg.validate_gmm().unwrap();
    cfg.validate_ising().unwrap();
}
