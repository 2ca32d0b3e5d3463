//! Text renderings of results: CSV tables and the JSON study report.
//!
//! Full-precision values use 17 significant digits in scientific notation so a
//! round trip through text reproduces the `f64` exactly.

use std::fmt::Write;

use crate::coeffs::CoeffTable;
use crate::harness::ConvergenceTable;
use crate::operator::Operator;
use crate::stability::StabilityCurve;
use crate::stepper::Trajectory;

/// 17 significant digits.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn coeffs_csv(table: &CoeffTable) -> String {
    let mut out = String::from("i,a,g\n");
    for (i, (a, g)) in table.a().iter().zip(table.g()).enumerate() {
        let _ = writeln!(out, "{i},{},{}", full(*a), full(*g));
    }
    out
}

pub fn stability_csv(curves: &[StabilityCurve]) -> String {
    let mut out = String::from("qtau,theta,lambda_r,lambda_i\n");
    for curve in curves {
        for p in &curve.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                full(p.q_tau),
                full(p.theta),
                full(p.lambda_r),
                full(p.lambda_i)
            );
        }
    }
    out
}

/// One row per stored level and node, boundary nodes included.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let grid = traj.grid();
    let n = grid.intervals();
    let mut out = String::from("t,x,u\n");
    for (t, state) in traj.times().zip(traj.states()) {
        for i in 0..=n {
            let u = if i == 0 || i == n { 0.0 } else { state[i - 1] };
            let _ = writeln!(out, "{},{},{}", full(t), full(grid.node(i)), full(u));
        }
    }
    out
}

/// The operator matrix, one CSV line per row.
pub fn operator_csv(op: &Operator) -> String {
    let m = op.matrix();
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| full(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `resolution,error,rate` with errors to 4 significant digits and rates to 4
/// decimals; the first row has no rate.
pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("resolution,error,rate\n");
    for row in &table.rows {
        let rate = row.rate.map(|r| format!("{r:.4}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:.3e},{rate}", row.resolution, row.error);
    }
    out
}

pub fn convergence_json(table: &ConvergenceTable) -> String {
    serde_json::to_string_pretty(table).expect("convergence table serializes")
}
