use std::fs;
use std::path::Path;

use fa_iscc::cli::run;

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("fa-iscc").chain(list.iter().copied()).map(String::from).collect()
}

fn out(dir: &Path) -> String {
    dir.to_str().unwrap().to_owned()
}

#[test]
fn missing_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(args(&["run", "--config", "/nonexistent/config.toml", "--out", &out(dir.path())]));
    assert_eq!(code, 2);
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "num_vehicles = 9\nnum_antennas = 4\n").unwrap();
    assert_eq!(run(args(&["run", "--config", cfg.to_str().unwrap(), "--out", &out(dir.path())])), 2);
}

#[test]
fn unmeetable_threshold_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    fs::write(&cfg, "latency_threshold_comm = 1e-7\n").unwrap();
    assert_eq!(run(args(&["run", "--config", cfg.to_str().unwrap(), "--out", &out(dir.path())])), 3);
}

#[test]
fn default_run_writes_three_rows_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "inner_iterations = 2\n[pso]\nswarm_size = 8\nmax_iterations = 5\n").unwrap();
    assert_eq!(run(args(&["run", "--config", cfg.to_str().unwrap(), "--out", &out(dir.path())])), 0);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "slot,iter,vehicle,T_off_c,T_exe_c,T_off_s,T_exe_s,T_total,system_total,feasible");
    // Iterations 0..=2, three vehicles each.
    assert_eq!(lines.len() - 1, 3 * 3);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["inner_iterations"], 2);
}

#[test]
fn equal_seeds_write_identical_traces() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let code = run(args(&["run", "--seed", "42", "--scheme", "scheme1", "--out", &out(dir.path())]));
        assert_eq!(code, 0);
    }
    let ta = fs::read(a.path().join("trace.csv")).unwrap();
    let tb = fs::read(b.path().join("trace.csv")).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "inner_iterations = 1\n[pso]\nswarm_size = 6\nmax_iterations = 3\n").unwrap();
    let code = run(args(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--param", "M", "--values", "4,6", "--seeds", "2", "--out",
        &out(dir.path()), "--plot",
    ]));
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "param,value,scheme,seed,mean_total_latency");
    assert_eq!(csv.lines().count() - 1, 2 * 2 * 7);
    assert!(dir.path().join("sweep.svg").exists());
}

#[test]
fn convergence_reports_stabilization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "inner_iterations = 3\n[pso]\nswarm_size = 6\nmax_iterations = 4\n").unwrap();
    let code = run(args(&["convergence", "--config", cfg.to_str().unwrap(), "--seeds", "2", "--out", &out(dir.path())]));
    assert_eq!(code, 0);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["stabilization"]["per_seed"].as_array().unwrap().len(), 2);
}

#[test]
fn bound_sdp_and_own_link_form_run() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(args(&[
        "run", "--combiner", "bound-sdp", "--interference", "paper", "--scheme", "baseline2", "--out", &out(dir.path()),
    ]));
    assert_eq!(code, 0);
}

#[test]
fn shipped_config_matches_builtin_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let cfg = fa_iscc::scenario::ScenarioConfig::from_file(&path).unwrap();
    assert_eq!(cfg, fa_iscc::scenario::ScenarioConfig::default());
}
