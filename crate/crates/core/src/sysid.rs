//! Least-squares identification of `x[k+1] = A x[k] + B u[k]` from logged
//! full-state data, plus the VAF fit score.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statespace::{StateSpaceModel, TimeSeries};

/// Reciprocal condition of ΨᵀΨ below which the data is rejected.
pub const MIN_RCOND: f64 = 1e-12;

/// Allowed relative deviation of any sample interval from the median.
pub const SAMPLE_JITTER_TOL: f64 = 0.01;

/// Stacked regression `y = Ψ Θ + E`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSystem {
    /// Rows `[x_kᵀ, u_kᵀ]`.
    pub psi: DMatrix<f64>,
    /// Rows `x_{k+1}ᵀ`.
    pub y: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct IdentificationResult {
    pub model: StateSpaceModel,
    /// RMS of the one-step residual, per state.
    pub residual_rms: Vec<f64>,
    /// Condition number of ΨᵀΨ.
    pub condition_estimate: f64,
}

/// Builds the one-step-ahead regression. Outputs are taken as the full state.
pub fn build_regression(data: &TimeSeries, n: usize) -> Result<RegressionSystem> {
    if n == 0 {
        return Err(Error::validation("state dimension must be at least 1"));
    }
    if data.len() < 2 {
        return Err(Error::validation(format!(
            "need at least 2 samples to form a regression row, got {}",
            data.len()
        )));
    }
    let m = data.inputs[0].len();
    for (k, (u, y)) in data.inputs.iter().zip(&data.outputs).enumerate() {
        if y.len() != n {
            return Err(Error::validation(format!(
                "sample {k}: output has {} channels, expected full state of {n}",
                y.len()
            )));
        }
        if u.len() != m {
            return Err(Error::validation(format!(
                "sample {k}: input has {} channels, expected {m}",
                u.len()
            )));
        }
    }
    let rows = data.len() - 1;
    let psi = DMatrix::from_fn(rows, n + m, |k, j| {
        if j < n {
            data.outputs[k][j]
        } else {
            data.inputs[k][j - n]
        }
    });
    let y = DMatrix::from_fn(rows, n, |k, j| data.outputs[k + 1][j]);
    Ok(RegressionSystem { psi, y })
}

/// Solves the regression by QR and unpacks `Θ = [Aᵀ; Bᵀ]`.
pub fn identify(data: &TimeSeries, n: usize) -> Result<IdentificationResult> {
    let reg = build_regression(data, n)?;
    let cols = reg.psi.ncols();
    let m = cols - n;
    if reg.psi.nrows() < cols {
        return Err(Error::validation(format!(
            "{} regression rows cannot determine {cols} parameters per state; need at least {} samples",
            reg.psi.nrows(),
            cols + 1
        )));
    }

    let sv = reg.psi.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let rcond = if smax > 0.0 { (smin / smax).powi(2) } else { 0.0 };
    if rcond.is_nan() || rcond < MIN_RCOND {
        return Err(Error::numerical(format!(
            "insufficient excitation: reciprocal condition of the data matrix product is {rcond:.3e}"
        )));
    }

    let qr = reg.psi.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let rhs = q.transpose() * &reg.y;
    let theta = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::numerical("insufficient excitation: triangular factor is singular"))?;

    let a = theta.rows(0, n).transpose();
    let b = theta.rows(n, m).transpose();
    let model = StateSpaceModel::new(a, b, DMatrix::identity(n, n), data.sample_rate)?;

    let resid = &reg.y - &reg.psi * &theta;
    let rows = resid.nrows() as f64;
    let residual_rms = (0..n)
        .map(|j| (resid.column(j).norm_squared() / rows).sqrt())
        .collect();

    Ok(IdentificationResult {
        model,
        residual_rms,
        condition_estimate: 1.0 / rcond,
    })
}

/// Fit score in percent: `max(0, 1 − Σ‖y − ŷ‖² / Σ‖y‖²)·100`.
///
/// Despite the name this uses raw second moments, not mean-removed
/// variances, so it is sensitive to offsets and scale.
pub fn vaf(measured: &[DVector<f64>], estimated: &[DVector<f64>]) -> Result<f64> {
    if measured.is_empty() || measured.len() != estimated.len() {
        return Err(Error::validation(format!(
            "VAF needs equal nonempty sequences, got {} and {}",
            measured.len(),
            estimated.len()
        )));
    }
    let mut err = 0.0;
    let mut energy = 0.0;
    for (k, (y, yh)) in measured.iter().zip(estimated).enumerate() {
        if y.len() != yh.len() {
            return Err(Error::validation(format!("sample {k}: channel counts differ")));
        }
        err += (y - yh).norm_squared();
        energy += y.norm_squared();
    }
    if energy == 0.0 {
        return Err(Error::validation("VAF undefined: measured sequence is identically zero"));
    }
    Ok((1.0 - err / energy).max(0.0) * 100.0)
}

/// VAF of a single scalar channel.
pub fn vaf_scalar(measured: &[f64], estimated: &[f64]) -> Result<f64> {
    let wrap = |s: &[f64]| s.iter().map(|&v| DVector::from_element(1, v)).collect::<Vec<_>>();
    vaf(&wrap(measured), &wrap(estimated))
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    u: f64,
    theta: f64,
    theta_dot: f64,
}

/// Reads a `t,u,theta,theta_dot` log and infers its sample rate.
pub fn read_csv(path: &Path) -> Result<TimeSeries> {
    let display = path.display().to_string();
    let parse_err = |message: String| Error::Parse { path: display.clone(), message };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io {
            path: display.clone(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => parse_err(e.to_string()),
    })?;
    let headers = rdr.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    let expected = ["t", "u", "theta", "theta_dot"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(parse_err(format!(
            "header must be t,u,theta,theta_dot, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<CsvRow>() {
        rows.push(rec.map_err(|e| parse_err(e.to_string()))?);
    }
    from_rows(&rows).map_err(|e| match e {
        Error::Validation(m) => parse_err(m),
        other => other,
    })
}

fn from_rows(rows: &[CsvRow]) -> Result<TimeSeries> {
    if rows.len() < 2 {
        return Err(Error::validation("need at least 2 samples"));
    }
    if let Some(i) = rows
        .iter()
        .position(|r| ![r.t, r.u, r.theta, r.theta_dot].iter().all(|v| v.is_finite()))
    {
        return Err(Error::validation(format!("row {}: non-finite value", i + 1)));
    }
    let mut dts: Vec<f64> = rows.windows(2).map(|w| w[1].t - w[0].t).collect();
    if let Some(i) = dts.iter().position(|&d| d <= 0.0) {
        return Err(Error::validation(format!("t is not strictly increasing at row {}", i + 2)));
    }
    let raw = dts.clone();
    dts.sort_by(f64::total_cmp);
    let median = dts[dts.len() / 2];
    if let Some(i) = raw
        .iter()
        .position(|&d| ((d - median) / median).abs() > SAMPLE_JITTER_TOL)
    {
        return Err(Error::validation(format!(
            "sample interval at row {} deviates more than 1% from the median {median}",
            i + 2
        )));
    }
    TimeSeries::new(
        1.0 / median,
        rows.iter().map(|r| DVector::from_element(1, r.u)).collect(),
        rows.iter()
            .map(|r| DVector::from_column_slice(&[r.theta, r.theta_dot]))
            .collect(),
    )
}

/// Writes a single-input, two-state series in the format `read_csv` accepts.
pub fn write_csv(path: &Path, data: &TimeSeries) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let dt = 1.0 / data.sample_rate;
    for (k, (u, y)) in data.inputs.iter().zip(&data.outputs).enumerate() {
        if u.len() != 1 || y.len() != 2 {
            return Err(Error::validation("CSV export supports one input and two outputs"));
        }
        w.serialize(CsvRow { t: k as f64 * dt, u: u[0], theta: y[0], theta_dot: y[1] })
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}
