use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;
use uav_secrecy::experiments::read_trajectory_csv;
use uav_secrecy::scenario::{validate_trajectory, ScenarioConfig};
use uav_secrecy_cli::{cli_main, EXIT_CONFIG, EXIT_OK};

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("uav-secrecy").chain(args.iter().copied()))
}

#[test]
fn solve_writes_trace_and_trajectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[scenario]\nT_s = 120\n");
    let out = tmp.path().join("out");
    let code = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--scheme",
        "JTDORA",
        "--scheme",
        "anera",
    ]);
    assert_eq!(code, EXIT_OK);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("scheme,T_s,iteration,asr_bpshz,error\n"));
    assert!(trace.contains("ANERA,120.0,0,"));
    let groups = read_trajectory_csv(&out.join("trajectory.csv")).unwrap();
    assert_eq!(groups.len(), 2);
    let table1 = ScenarioConfig::table1(120.0);
    for (_, t, traj) in groups {
        assert_eq!(t, 120.0);
        assert!(validate_trajectory(&traj, &table1).unwrap().is_empty());
    }
}

#[test]
fn baseline_writes_only_trajectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[scenario]\nT_s = 100\n");
    let out = tmp.path().join("b");
    assert_eq!(
        run(&["baseline", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]),
        EXIT_OK
    );
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec!["trajectory.csv"]);
    let groups = read_trajectory_csv(&out.join("trajectory.csv")).unwrap();
    let (scheme, _, traj) = &groups[0];
    assert_eq!(scheme, "BASELINE");
    assert_eq!(traj.len(), 100);
    assert!(traj.waypoints.iter().all(|w| (w.x - 50.0).abs() < 1e-9));
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[scenario]\nT_s = 120\n[experiment]\nsweep_values = [100, 130]\nschemes = [\"JTDORA\", \"TDPC\"]\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        assert_eq!(
            run(&["sweep-t", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]),
            EXIT_OK
        );
    }
    let fa = fs::read(a.join("sweep_time.csv")).unwrap();
    assert_eq!(fa, fs::read(b.join("sweep_time.csv")).unwrap());
    assert_eq!(String::from_utf8(fa).unwrap().lines().count(), 5);
}

#[test]
fn power_sweep_uses_dbm_axis() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[scenario]\nT_s = 120\n[experiment]\nsweep_values = [-10, 0]\nsplits = [0.5, 0.9]\n",
    );
    let out = tmp.path().join("p");
    assert_eq!(
        run(&["sweep-p", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"]),
        EXIT_OK
    );
    let text = fs::read_to_string(out.join("sweep_power.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,lambda,P_ave_dBm,asr_bpshz,error"));
    assert_eq!(lines.count(), 4);
    assert!(text.contains("JTDORA,0.9,-10.0,"));
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.toml");
    assert_eq!(run(&["solve", "--config", missing.to_str().unwrap()]), EXIT_CONFIG);

    let infeasible = write_config(tmp.path(), "[scenario]\nT_s = 50\n");
    assert_eq!(run(&["solve", "--config", infeasible.to_str().unwrap()]), EXIT_CONFIG);

    let ok = write_config(tmp.path(), "[scenario]\nT_s = 120\n");
    assert_eq!(
        run(&["solve", "--config", ok.to_str().unwrap(), "--scheme", "BOGUS"]),
        EXIT_CONFIG
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["fly"]), EXIT_CONFIG);
    assert_eq!(run(&["solve", "--frobnicate"]), EXIT_CONFIG);
    assert_eq!(run(&[]), EXIT_CONFIG);
}

#[test]
fn shipped_config_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    let (cfg, spec) = uav_secrecy::experiments::load_config_file(&path, None).unwrap();
    assert_eq!(cfg, ScenarioConfig::table1(150.0));
    assert_eq!(spec.schemes.len(), 5);
}
