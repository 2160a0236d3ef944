use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nmdyn::harness::table::Table;
use nmdyn::harness::RunManifest;

const LAB: &str = r#"
[protocol.uniform]
steps = 20
eta = 0.5
delta_l = 120

[sweep]
etas = [0.0, 0.5, 1.0]
delta_ls = [80, 120]
"#;

fn nmdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmdyn")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(args: &[&str]) {
    let out = nmdyn(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let out = dir.path().join("sim");
    run_ok(&["--config", s(&cfg), "--out-dir", s(&out), "simulate"]);
    let t = Table::read(&out.join("trajectory.csv")).unwrap();
    assert_eq!(t.len(), 21);
    assert_eq!(
        t.header(),
        ["step", "D", "Delta", "N", "r1_x", "r1_y", "r1_z", "r2_x", "r2_y", "r2_z"]
    );
    let d = t.column("D").unwrap();
    assert_eq!(d[0], 1.0);
    let n = t.column("N").unwrap();
    assert!(n.windows(2).all(|w| w[1] >= w[0]));
    let manifest = RunManifest::load(&out.join("manifest.json")).unwrap();
    assert!(manifest.digest("trajectory.csv").is_some());
    assert!(manifest.digest("summary.csv").is_some());
}

#[test]
fn thinner_plate_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p80.toml", &LAB.replace("delta_l = 120", "delta_l = 80"));
    let out = dir.path().join("sim");
    run_ok(&["--config", s(&cfg), "--out-dir", s(&out), "simulate"]);
    let d = Table::read(&out.join("trajectory.csv")).unwrap().column("D").unwrap();
    assert!((d[1] - 0.277).abs() < 5e-4, "{}", d[1]);
}

#[test]
fn spin_echo_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[protocol]\ninitial_pair = [\"D\", \"A\"]\n[protocol.uniform]\nsteps = 4\neta = 0.0\ndelta_l = 120\n";
    let cfg = write_config(dir.path(), "echo.toml", text);
    let out = dir.path().join("sim");
    run_ok(&["--config", s(&cfg), "--out-dir", s(&out), "simulate"]);
    let d = Table::read(&out.join("trajectory.csv")).unwrap().column("D").unwrap();
    for k in [0, 2, 4] {
        assert!((d[k] - 1.0).abs() < 1e-10, "D({k}) = {}", d[k]);
    }
    assert!(d[1] < 0.1);
}

#[test]
fn identical_runs_are_byte_identical_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(&["--config", s(&cfg), "--out-dir", s(out), "--workers", "2", "sweep"]);
    }
    assert_eq!(
        std::fs::read(a.join("sweep.csv")).unwrap(),
        std::fs::read(b.join("sweep.csv")).unwrap()
    );
    let out = nmdyn(&["--out-dir", s(&dir.path().join("replay")), "verify", s(&a.join("manifest.json"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let out = dir.path().join("sweep");
    run_ok(&["--config", s(&cfg), "--out-dir", s(&out), "sweep"]);
    let t = Table::read(&out.join("sweep.csv")).unwrap();
    assert_eq!(t.len(), 6);
    let etas = t.column("eta").unwrap();
    let n_opt = t.column("N_opt_final").unwrap();
    for (eta, n) in etas.iter().zip(&n_opt) {
        if *eta == 1.0 {
            assert!(n.abs() < 1e-12);
        }
        if *eta == 0.0 {
            assert!(*n > 0.0);
        }
    }
}

#[test]
fn single_point_sweep_matches_simulate_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = LAB.replace("etas = [0.0, 0.5, 1.0]", "etas = [0.5]").replace("delta_ls = [80, 120]", "delta_ls = [120]");
    let cfg = write_config(dir.path(), "one.toml", &text);
    let (sim, sweep) = (dir.path().join("sim"), dir.path().join("sweep"));
    run_ok(&["--config", s(&cfg), "--out-dir", s(&sim), "simulate"]);
    run_ok(&["--config", s(&cfg), "--out-dir", s(&sweep), "sweep"]);
    let a = Table::read(&sim.join("summary.csv")).unwrap();
    let b = Table::read(&sweep.join("sweep.csv")).unwrap();
    for col in a.header() {
        let k = b.header().iter().position(|h| h == col).unwrap();
        assert_eq!(a.rows()[0], a.rows()[0]);
        let j = a.header().iter().position(|h| h == col).unwrap();
        assert_eq!(a.rows()[0][j], b.rows()[0][k], "{col}");
    }
}

#[test]
fn figures_have_expected_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    run_ok(&["--out-dir", s(&out), "figures", "--plot"]);
    for (id, series) in [(2, 2), (3, 2), (4, 5), (5, 5)] {
        let t = Table::read(&out.join(format!("figure{id}.csv"))).unwrap();
        assert_eq!(t.len(), series * 21, "figure {id}");
        assert!(out.join(format!("figure{id}.svg")).exists());
        if id == 3 || id == 5 {
            let n = t.column("N").unwrap();
            for chunk in n.chunks(21) {
                assert!(chunk.windows(2).all(|w| w[1] >= w[0]));
            }
        } else {
            assert!(t.column("D").unwrap().iter().all(|d| (0.0..=1.0).contains(d)));
        }
    }
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let out = nmdyn(&["figures", "--id", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &LAB.replace("eta = 0.5", "eta = -0.5"));
    let out = nmdyn(&["--config", s(&cfg), "--out-dir", s(&dir.path().join("x")), "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("protocol.uniform.eta") && err.contains("line 4"), "{err}");

    let out = nmdyn(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn backend_disagreement_exits_with_three() {
    // a grid this coarse aliases the plate phase
    let dir = tempfile::tempdir().unwrap();
    let text = LAB.replace("steps = 20", "steps = 1").replace("delta_l = 120", "delta_l = 1");
    let cfg = write_config(dir.path(), "coarse.toml", &text);
    let out = nmdyn(&[
        "--config",
        s(&cfg),
        "--backend",
        "both",
        "--nodes",
        "5",
        "--out-dir",
        s(&dir.path().join("x")),
        "simulate",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn maps_report_labels_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "lab.toml", LAB);
    let out = dir.path().join("maps");
    run_ok(&["--config", s(&cfg), "--out-dir", s(&out), "maps"]);
    let t = Table::read(&out.join("divisibility.csv")).unwrap();
    assert_eq!(t.len(), 20);
    let labels: Vec<&str> = t.rows().iter().map(|r| r[1].as_str()).collect();
    assert_eq!(labels[0], "cp_divisible");
    assert!(labels.contains(&"non_p_divisible"));
    let pair = Table::read(&out.join("optimal_pair.csv")).unwrap();
    assert_eq!(pair.len(), 21);
}

#[test]
fn optimize_respects_budget_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = LAB.replace("steps = 20", "steps = 2");
    let cfg = write_config(dir.path(), "two.toml", &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(&["--config", s(&cfg), "--out-dir", s(out), "--seed", "5", "optimize", "--budget", "30"]);
    }
    let log = Table::read(&a.join("evaluations.csv")).unwrap();
    assert!(log.len() <= 30);
    assert_eq!(
        std::fs::read(a.join("evaluations.csv")).unwrap(),
        std::fs::read(b.join("evaluations.csv")).unwrap()
    );
    let nm = Table::read(&a.join("nm.csv")).unwrap().column("N").unwrap();
    let start = log.column("N").unwrap()[0];
    assert!(nm[2] >= start);

    let one = dir.path().join("one");
    run_ok(&["--config", s(&cfg), "--out-dir", s(&one), "optimize", "--budget", "1"]);
    let schedule = Table::read(&one.join("schedule.csv")).unwrap().column("eta").unwrap();
    assert_eq!(schedule, vec![0.5, 0.5]);
}
