//! CSV tables. Comma-delimited, LF line endings, header row always present,
//! floats at six significant digits.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{CompareRow, Estimator, RunOutput, SweepRow};
use crate::sdp::FilterDesign;

/// `v` rounded to six significant digits, printed without exponent noise.
pub fn fmt6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

pub const DESIGN_HEADER: [&str; 14] = [
    "alpha", "theta", "beta", "delta_t", "mu1", "mu2", "mu3", "sqrt_mu1", "L1", "L2", "P11", "P12",
    "P22", "feasible",
];

/// One design row; inputs are always filled, results only when feasible.
pub fn design_row(alpha: f64, theta: f64, beta: f64, delta_t: f64, design: Option<&FilterDesign>) -> Vec<String> {
    let mut row = vec![fmt6(alpha), fmt6(theta), fmt6(beta), fmt6(delta_t)];
    match design {
        Some(d) => {
            row.extend(
                [
                    d.mu1,
                    d.mu2,
                    d.mu3,
                    d.sqrt_mu1(),
                    d.gain[0],
                    d.gain[1],
                    d.p.get(0, 0),
                    d.p.get(0, 1),
                    d.p.get(1, 1),
                ]
                .map(fmt6),
            );
            row.push("true".into());
        }
        None => {
            row.extend(std::iter::repeat(String::new()).take(9));
            row.push("false".into());
        }
    }
    row
}

pub fn write_design(dir: &Path, row: Vec<String>) -> Result<PathBuf> {
    write_table(&dir.join("design.csv"), &DESIGN_HEADER, &[row])
}

pub const TRACE_HEADER: [&str; 18] = [
    "cycle",
    "x_all",
    "x_cv",
    "theta",
    "meas_f_all_in",
    "meas_f_all_out",
    "meas_f_cv_in",
    "meas_f_cv_out",
    "meas_x_cv",
    "robust_x_all",
    "robust_x_cv",
    "open_loop_x_all",
    "open_loop_x_cv",
    "kalman_x_all",
    "kalman_x_cv",
    "metering",
    "criterion_lhs",
    "criterion_rhs",
];

pub fn write_trace(dir: &Path, run: &RunOutput) -> Result<PathBuf> {
    let rows: Vec<Vec<String>> = run
        .trace
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = vec![r.cycle.to_string(), fmt6(r.truth.x_all), fmt6(r.truth.x_cv), fmt6(r.theta)];
            row.extend(r.meas.as_array().map(fmt6));
            for e in &r.estimates {
                row.extend(e.map(fmt6));
            }
            row.push(fmt6(r.metering));
            match &run.criterion {
                Some(c) => {
                    row.push(fmt6(c.lhs[i]));
                    row.push(fmt6(c.rhs[i]));
                }
                None => row.extend([String::new(), String::new()]),
            }
            row
        })
        .collect();
    write_table(&dir.join("trace.csv"), &TRACE_HEADER, &rows)
}

pub const METRICS_HEADER: [&str; 6] = [
    "estimator",
    "rmse",
    "mu1_hat",
    "sqrt_mu1_hat",
    "criterion_violations",
    "spillback",
];

pub fn write_metrics(dir: &Path, run: &RunOutput) -> Result<PathBuf> {
    let rows: Vec<Vec<String>> = Estimator::ALL
        .iter()
        .map(|est| {
            let m = &run.metrics[est.index()];
            vec![
                est.name().to_string(),
                fmt6(m.rmse),
                fmt6(m.mu1_hat),
                fmt6(m.sqrt_mu1_hat),
                m.criterion_violations.map(|v| v.to_string()).unwrap_or_default(),
                m.spillback.to_string(),
            ]
        })
        .collect();
    write_table(&dir.join("metrics.csv"), &METRICS_HEADER, &rows)
}

pub const SWEEP_HEADER: [&str; 7] = [
    "alpha",
    "theta",
    "flow_bound",
    "sqrt_mu1",
    "mean_sqrt_mu1_hat",
    "mean_rmse",
    "error",
];

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt6(r.alpha),
                fmt6(r.theta),
                fmt6(r.flow_bound),
                opt(r.sqrt_mu1),
                opt(r.mean_sqrt_mu1_hat),
                opt(r.mean_rmse),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(&dir.join("sweep.csv"), &SWEEP_HEADER, &rows)
}

pub const COMPARE_HEADER: [&str; 5] = ["scenario", "estimator", "alpha", "mean_sqrt_mu1_hat", "mean_rmse"];

pub fn write_compare(dir: &Path, rows: &[CompareRow]) -> Result<PathBuf> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.scenario.to_string(),
                r.estimator.name().to_string(),
                fmt6(r.alpha),
                fmt6(r.mean_sqrt_mu1_hat),
                fmt6(r.mean_rmse),
            ]
        })
        .collect();
    write_table(&dir.join("compare.csv"), &COMPARE_HEADER, &rows)
}
