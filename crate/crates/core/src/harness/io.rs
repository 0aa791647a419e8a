use std::path::Path;

use serde::Serialize;

use super::metrics::TransientMetrics;
use super::run::{Outcome, SimTrace, TraceRecord};
use crate::error::{Error, Result};

fn io_err(path: &Path, e: impl ToString) -> Error {
    Error::Io { path: path.display().to_string(), source: std::io::Error::other(e.to_string()) }
}

#[derive(Serialize)]
struct CsvRecord {
    t: f64,
    theta_true: f64,
    theta_dot_true: f64,
    theta_meas: f64,
    theta_dot_meas: f64,
    theta_hat: f64,
    theta_dot_hat: f64,
    u: f64,
    k_theta: f64,
    k_theta_dot: f64,
    x_cp: f64,
    step_active: u8,
    disturbance: u8,
}

impl From<&TraceRecord> for CsvRecord {
    fn from(r: &TraceRecord) -> Self {
        Self {
            t: r.t,
            theta_true: r.theta_true,
            theta_dot_true: r.theta_dot_true,
            theta_meas: r.theta_meas,
            theta_dot_meas: r.theta_dot_meas,
            theta_hat: r.theta_hat,
            theta_dot_hat: r.theta_dot_hat,
            u: r.u,
            k_theta: r.k_theta,
            k_theta_dot: r.k_theta_dot,
            x_cp: r.x_cp,
            step_active: r.step_active.into(),
            disturbance: r.disturbance.into(),
        }
    }
}

/// Plot-ready per-step trace; flags are written as 0/1.
pub fn write_trace_csv(path: &Path, trace: &SimTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in &trace.records {
        w.serialize(CsvRecord::from(r)).map_err(|e| io_err(path, e))?;
    }
    if trace.records.is_empty() {
        w.write_record([
            "t", "theta_true", "theta_dot_true", "theta_meas", "theta_dot_meas", "theta_hat", "theta_dot_hat", "u",
            "k_theta", "k_theta_dot", "x_cp", "step_active", "disturbance",
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub metrics: TransientMetrics,
    pub outcome: Outcome,
}

pub fn write_metrics_json(path: &Path, report: &MetricsReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| io_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io { path: path.display().to_string(), source })
}
