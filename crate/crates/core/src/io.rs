//! CSV and JSON serialization of trajectories and result tables.
//!
//! CSV headers are part of the stable interface:
//!
//! - trajectories: `time,b,d`
//! - community trajectories: `time,b1,d1,...,bM,dM`
//! - expected spread: `m,h,h_over_n`
//! - planning: `gamma,alpha,T,d0_star,iterations`
//! - convergence: `N,sup_dist`
//! - allocation surfaces: `d1_0,...,dM_0,total_spread`
//!
//! JSON documents mirror the CSV content and add a schema version plus an
//! echo of the producing configuration. All numbers are written in Rust's
//! shortest round-trip form, so identical inputs give byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::discrete::ExpectedSpreadTable;
use crate::multiclass::{AllocationCell, MultiTrajectory};
use crate::planner::SweepRow;
use crate::scalar::Real;
use crate::sim::ConvergenceRow;
use crate::trajectory::Trajectory;

/// Version stamp embedded in every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

pub fn trajectory_csv<T: Real>(traj: &Trajectory<T>) -> String {
    let mut out = String::with_capacity(traj.len() * 24 + 16);
    out.push_str("time,b,d\n");
    for s in &traj.samples {
        writeln!(out, "{},{},{}", s.t, s.b, s.d).expect("string write");
    }
    out
}

pub fn multi_trajectory_csv<T: Real>(traj: &MultiTrajectory<T>) -> String {
    let m = traj.communities();
    let mut out = String::new();
    out.push_str("time");
    for i in 1..=m {
        write!(out, ",b{i},d{i}").expect("string write");
    }
    out.push('\n');
    for k in 0..traj.times.len() {
        write!(out, "{}", traj.times[k]).expect("string write");
        for i in 0..m {
            write!(out, ",{},{}", traj.b[k][i], traj.d[k][i]).expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn expected_table_csv<T: Real>(table: &ExpectedSpreadTable<T>) -> String {
    let mut out = String::with_capacity(table.values.len() * 24 + 16);
    out.push_str("m,h,h_over_n\n");
    let n = crate::scalar::real::<T>(table.n as f64);
    for (m, &h) in table.values.iter().enumerate() {
        writeln!(out, "{},{},{}", m, h, h / n).expect("string write");
    }
    out
}

pub fn sweep_csv<T: Real>(rows: &[SweepRow<T>]) -> String {
    let mut out = String::new();
    out.push_str("gamma,alpha,T,d0_star,iterations\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.gamma, r.alpha, r.t, r.d0_star, r.iterations
        )
        .expect("string write");
    }
    out
}

pub fn convergence_csv<T: Real>(rows: &[ConvergenceRow<T>]) -> String {
    let mut out = String::new();
    out.push_str("N,sup_dist\n");
    for r in rows {
        writeln!(out, "{},{}", r.n, r.sup_dist).expect("string write");
    }
    out
}

pub fn surface_csv<T: Real>(surface: &[AllocationCell<T>]) -> String {
    let m = surface.first().map_or(0, |c| c.allocation.len());
    let mut out = String::new();
    for i in 1..=m {
        write!(out, "d{i}_0,").expect("string write");
    }
    out.push_str("total_spread\n");
    for cell in surface {
        for d in &cell.allocation {
            write!(out, "{d},").expect("string write");
        }
        writeln!(out, "{}", cell.total_spread).expect("string write");
    }
    out
}

/// JSON document for a trajectory: schema version, command, config echo,
/// route, terminal flag, warnings and samples.
pub fn trajectory_json<T: Real>(
    traj: &Trajectory<T>,
    command: &str,
    config: &serde_json::Value,
) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "route": traj.route,
        "terminal": traj.terminal,
        "warnings": traj.warnings,
        "samples": traj.samples,
    });
    pretty(&doc)
}

/// JSON document for any serializable table payload.
pub fn table_json(
    command: &str,
    config: &serde_json::Value,
    payload_key: &str,
    payload: impl Serialize,
) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        payload_key: serde_json::to_value(payload).expect("payload serializes"),
    });
    pretty(&doc)
}

fn pretty(doc: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Route;

    #[test]
    fn trajectory_csv_layout() {
        let mut t = Trajectory::<f64>::new(Route::Ode);
        t.push(0.0, 0.0, 0.2);
        t.push(0.5, 0.1, 0.15);
        let csv = trajectory_csv(&t);
        assert_eq!(csv, "time,b,d\n0,0,0.2\n0.5,0.1,0.15\n");
    }

    #[test]
    fn json_has_schema_and_echo() {
        let mut t = Trajectory::<f64>::new(Route::ClosedForm);
        t.push(0.0, 0.0, 0.2);
        t.terminal = true;
        let cfg = json!({"gamma": 0.9});
        let doc: serde_json::Value =
            serde_json::from_str(&trajectory_json(&t, "ode", &cfg)).unwrap();
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["config"]["gamma"], 0.9);
        assert_eq!(doc["route"], "closed-form");
        assert_eq!(doc["terminal"], true);
        assert_eq!(doc["samples"][0]["d"], 0.2);
    }

    #[test]
    fn surface_csv_headers_scale_with_communities() {
        let surface = vec![AllocationCell {
            allocation: vec![0.1, 0.2],
            total_spread: 0.8,
        }];
        let csv = surface_csv(&surface);
        assert!(csv.starts_with("d1_0,d2_0,total_spread\n"));
        assert!(csv.contains("0.1,0.2,0.8"));
    }

    #[test]
    fn identical_inputs_give_identical_bytes() {
        let mut t = Trajectory::<f64>::new(Route::Exact);
        t.push(0.0, 0.0, 0.25);
        t.push(1.0, 0.25, 0.125);
        assert_eq!(trajectory_csv(&t), trajectory_csv(&t.clone()));
    }
}
