//! End-to-end tests of the `hilt` binary: every path is a thin adapter, so
//! outputs are diffed against the library operations called directly.

use std::path::Path;
use std::process::{Command, Output};

use hilt_core::dist::ThresholdDist;
use hilt_core::ode::{integrate, StepControl, UniformClosedForm};
use hilt_core::sim::{run_cascade, HiltConfig};
use hilt_core::trajectory::Route;

fn hilt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = hilt(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

fn parse_trajectory_csv(csv: &str) -> Vec<(f64, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,b,d"));
    lines
        .map(|l| {
            let mut it = l.split(',').map(|tok| tok.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn ode_csv_matches_the_closed_form() {
    let csv = stdout_of(&[
        "ode", "--dist", "uniform", "--gamma", "0.9", "--d0", "0.2", "--t-end", "30",
    ]);
    let cf = UniformClosedForm::new(0.9, 0.2).unwrap();
    let mut sup: f64 = 0.0;
    for (t, b, d) in parse_trajectory_csv(&csv) {
        let s = cf.state_at(t).unwrap();
        sup = sup.max((b - s.b).abs()).max((d - s.d).abs());
    }
    assert!(sup <= 1e-6, "sup deviation {sup}");
}

#[test]
fn ode_is_a_thin_adapter_over_integrate() {
    let csv = stdout_of(&["ode", "--gamma", "0.7", "--d0", "0.1", "--t-end", "5"]);
    let traj = integrate(
        &ThresholdDist::<f64>::Uniform01,
        0.7,
        0.1,
        5.0,
        &StepControl::default(),
    )
    .unwrap();
    assert_eq!(csv, hilt_core::io::trajectory_csv(&traj));
}

#[test]
fn closed_form_route_is_exact_at_the_grid_points() {
    let csv = stdout_of(&[
        "ode", "--closed-form", "--gamma", "0.9", "--d0", "0.2", "--t-end", "2", "--step", "0.5",
    ]);
    let rows = parse_trajectory_csv(&csv);
    assert_eq!(rows.len(), 5);
    let cf = UniformClosedForm::new(0.9, 0.2).unwrap();
    for (t, b, _d) in rows {
        assert_eq!(b, cf.state_at(t).unwrap().b);
    }
}

#[test]
fn simulate_is_a_thin_adapter_over_run_cascade() {
    let csv = stdout_of(&[
        "simulate", "--n", "500", "--gamma", "0.9", "--d0", "0.2", "--seed", "42",
    ]);
    let cfg = HiltConfig::new(500, 0.9, 0.2, ThresholdDist::Uniform01).unwrap();
    let traj = run_cascade(&cfg, Route::Exact, 42, 502).unwrap();
    assert_eq!(csv, hilt_core::io::trajectory_csv(&traj));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "simulate", "--n", "300", "--gamma", "0.8", "--d0", "0.1", "--route", "scaled",
        "--seed", "7", "--runs", "4",
    ];
    assert_eq!(stdout_of(&args), stdout_of(&args));
}

#[test]
fn plan_seed_prints_a_sound_seed() {
    let out = stdout_of(&["plan-seed", "--gamma", "0.8", "--alpha", "0.7", "--deadline", "15"]);
    let d0: f64 = out.trim().parse().unwrap();
    assert!(d0 > 0.31818 && d0 < 1.0);
    let achieved = UniformClosedForm::new(0.8, d0)
        .unwrap()
        .active_at(15.0)
        .unwrap();
    assert!((achieved - 0.7).abs() <= 1e-4);
}

#[test]
fn plan_time_matches_the_library() {
    let out = stdout_of(&["plan-time", "--gamma", "0.9", "--d0", "0.2", "--alpha", "0.5"]);
    let t: f64 = out.trim().parse().unwrap();
    let expected = hilt_core::planner::time_to_reach(0.5, 0.2, 0.9).unwrap();
    assert_eq!(t, expected);
}

#[test]
fn plan_sweep_emits_the_planning_schema() {
    let csv = stdout_of(&[
        "plan-sweep",
        "--gamma-list", "0,0.5",
        "--alpha-list", "0.3",
        "--deadline-list", "2,8",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gamma,alpha,T,d0_star,iterations"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn expected_single_point_matches_the_recursion() {
    let out = stdout_of(&["expected", "--n", "3000", "--gamma", "0.9", "--m", "600"]);
    let h_line = out.lines().nth(1).unwrap();
    let h: f64 = h_line.split(',').nth(1).unwrap().parse().unwrap();
    let exact = hilt_core::discrete::expected_spread(3000, 0.9 / 3000.0, 600).unwrap();
    assert_eq!(h, exact);
}

#[test]
fn compare_sir_reports_a_tiny_distance() {
    let out = stdout_of(&[
        "compare-sir", "--rate", "2", "--gamma", "0.7", "--d0", "0.1", "--t-end", "20",
    ]);
    let sup: f64 = out.trim().parse().unwrap();
    assert!(sup <= 1e-8, "sup {sup}");
}

#[test]
fn json_output_carries_schema_and_config_echo() {
    let out = stdout_of(&[
        "ode", "--gamma", "0.9", "--d0", "0.2", "--t-end", "1", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["gamma"], 0.9);
    assert_eq!(doc["config"]["dist"]["kind"], "uniform");
    assert_eq!(doc["route"], "ode");
    assert!(doc["samples"].as_array().unwrap().len() > 500);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "gamma = 0.5\nd0 = 0.2\nt_end = 3.0\n").unwrap();
    let from_cfg = stdout_of(&["ode", "--config", cfg_path.to_str().unwrap()]);
    let pure_flags = stdout_of(&["ode", "--gamma", "0.5", "--d0", "0.2", "--t-end", "3"]);
    assert_eq!(from_cfg, pure_flags);

    // a flag must override the file entry
    let overridden = stdout_of(&[
        "ode", "--config", cfg_path.to_str().unwrap(), "--gamma", "0.9",
    ]);
    let reference = stdout_of(&["ode", "--gamma", "0.9", "--d0", "0.2", "--t-end", "3"]);
    assert_eq!(overridden, reference);
}

#[test]
fn multiclass_config_drives_integration_and_optimization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("net.cfg");
    std::fs::write(
        &cfg_path,
        r#"
g = [2.0, 0.2; 0.2, 2.0]
t_end = 60.0

[community]
size = 0.7
dist = "exponential"; rate = 1.0

[community]
size = 0.3
dist = "exponential"; rate = 1.0
"#,
    )
    .unwrap();
    let cfg = cfg_path.to_str().unwrap();

    let csv = stdout_of(&["multiclass", "--config", cfg, "--d-init", "0.0,0.3"]);
    assert!(csv.starts_with("time,b1,d1,b2,d2\n"));

    // thin adapter: identical bytes to the library route
    let net = hilt_core::multiclass::CommunityNetwork::new(
        vec![0.7, 0.3],
        vec![vec![2.0, 0.2], vec![0.2, 2.0]],
        vec![
            ThresholdDist::exponential(1.0).unwrap(),
            ThresholdDist::exponential(1.0).unwrap(),
        ],
    )
    .unwrap();
    let traj = hilt_core::multiclass::integrate_multiclass(
        &net,
        &[0.0, 0.3],
        60.0,
        &StepControl::default(),
    )
    .unwrap();
    assert_eq!(csv, hilt_core::io::multi_trajectory_csv(&traj));

    let surface = stdout_of(&[
        "multiclass", "--config", cfg, "--optimize", "--budget", "0.3", "--resolution", "7",
    ]);
    assert!(surface.starts_with("d1_0,d2_0,total_spread\n"));
    assert_eq!(surface.lines().count(), 8);
}

#[test]
fn convergence_emits_distances_per_population_size() {
    let csv = stdout_of(&[
        "convergence", "--gamma", "0.9", "--d0", "0.2", "--n-list", "30,60", "--runs", "3",
        "--seed", "1",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,sup_dist"));
    assert_eq!(lines.count(), 2);

    // thin adapter: identical bytes to the library route
    let report = hilt_core::sim::fluid_convergence(
        &ThresholdDist::<f64>::Uniform01,
        0.9,
        0.2,
        &[30, 60],
        3,
        1,
        &StepControl::default(),
    )
    .unwrap();
    assert_eq!(csv, hilt_core::io::convergence_csv(&report.rows));
}

#[test]
fn exit_codes_distinguish_usage_domain_and_numerical_failures() {
    // structural usage error via clap
    let out = hilt(&["simulate", "--n", "0", "--gamma", "0.9", "--d0", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    // missing parameter
    let out = hilt(&["ode", "--d0", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    // domain error from the library (uniform thresholds need scale <= 1)
    let out = hilt(&["ode", "--gamma", "1.5", "--d0", "0.2"]);
    assert_eq!(out.status.code(), Some(3));
    // numerical failure: singular decreasing hazard at the default step
    let out = hilt(&[
        "ode", "--dist", "weibull", "--scale", "1", "--shape", "0.5", "--gamma", "0.3",
        "--d0", "0.2", "--t-end", "5",
    ]);
    assert_eq!(out.status.code(), Some(4));
    // unknown flag
    let out = hilt(&["ode", "--gamma", "0.9", "--d0", "0.2", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_files_match_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = hilt(&[
        "ode", "--gamma", "0.9", "--d0", "0.2", "--t-end", "2", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let via_file = std::fs::read_to_string(Path::new(&path)).unwrap();
    let via_stdout = stdout_of(&["ode", "--gamma", "0.9", "--d0", "0.2", "--t-end", "2"]);
    assert_eq!(via_file, via_stdout);
}
