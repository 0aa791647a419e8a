use serde::Serialize;

use super::run::SimTrace;
use crate::error::{Error, Result};

/// Share of the trace, from the end, averaged into the final value.
pub const FINAL_WINDOW: f64 = 0.05;

pub const DEFAULT_SETTLE_BAND: f64 = 0.02;

/// Recovery statistics of the θ channel after a disturbance. Times are
/// seconds, amplitudes degrees. Undefined times are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransientMetrics {
    pub rise_time_s: Option<f64>,
    pub settling_time_s: Option<f64>,
    pub max_overshoot_deg: f64,
    pub steady_state_error_deg: f64,
    pub robustness_delta_deg: f64,
}

pub fn transient_metrics(trace: &SimTrace, settle_band: f64) -> Result<TransientMetrics> {
    let t: Vec<f64> = trace.records.iter().map(|r| r.t).collect();
    let flags: Vec<bool> = trace.records.iter().map(|r| r.disturbance).collect();
    transient_metrics_of(&t, &trace.theta(), &flags, settle_band)
}

/// Metrics of a sampled response `y(t)`; `disturbed` marks the onset.
///
/// * final value: mean of the last 5% of samples
/// * extremum: post-onset sample farthest from the final value
/// * rise time: between the first crossings of 10% and 90% of the way from
///   the extremum to the final value (linearly interpolated)
/// * settling time: from onset until the response stays within
///   `settle_band · |final − extremum|` of the final value
/// * overshoot: largest excursion past the final value after the extremum
/// * robustness delta: `|final − extremum|`
pub fn transient_metrics_of(t: &[f64], y: &[f64], disturbed: &[bool], settle_band: f64) -> Result<TransientMetrics> {
    let n = y.len();
    if n < 2 || t.len() != n || disturbed.len() != n {
        return Err(Error::validation("transient metrics need at least 2 aligned samples"));
    }
    if !(settle_band > 0.0 && settle_band < 1.0) {
        return Err(Error::validation("settle_band must lie in (0, 1)"));
    }
    let tail = ((n as f64 * FINAL_WINDOW).ceil() as usize).clamp(1, n);
    let y_final = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let onset = disturbed.iter().position(|&d| d).unwrap_or(0);

    let ext = (onset..n)
        .max_by(|&a, &b| (y[a] - y_final).abs().total_cmp(&(y[b] - y_final).abs()).then(b.cmp(&a)))
        .expect("nonempty range");
    let y_ext = y[ext];
    let span = y_final - y_ext;
    let dir = span.signum();

    let crossing = |frac: f64| -> Option<f64> {
        let level = y_ext + frac * span;
        if span == 0.0 {
            return None;
        }
        (ext + 1..n).find(|&i| dir * (y[i] - level) >= 0.0).map(|i| {
            let (y0, y1) = (y[i - 1], y[i]);
            if y1 == y0 {
                t[i]
            } else {
                t[i - 1] + (level - y0) / (y1 - y0) * (t[i] - t[i - 1])
            }
        })
    };
    let rise_time_s = match (crossing(0.1), crossing(0.9)) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };

    let band = settle_band * span.abs();
    let settling_time_s = match (onset..n).rev().find(|&i| (y[i] - y_final).abs() > band) {
        None => Some(0.0),
        Some(last) if last + 1 < n => Some(t[last + 1] - t[onset]),
        Some(_) => None,
    };

    let max_overshoot_deg = y[ext..].iter().map(|&v| dir * (v - y_final)).fold(0.0, f64::max);

    Ok(TransientMetrics {
        rise_time_s,
        settling_time_s,
        max_overshoot_deg,
        steady_state_error_deg: y_final.abs(),
        robustness_delta_deg: span.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_step_recovery() {
        // y = −10·e^(−t/τ): rise 10%→90% takes τ·ln 9
        let dt = 0.001;
        let tau = 0.2;
        let t: Vec<f64> = (0..5000).map(|k| k as f64 * dt).collect();
        let y: Vec<f64> = t.iter().map(|&s| -10.0 * (-s / tau).exp()).collect();
        let mut d = vec![false; t.len()];
        d[0] = true;
        let m = transient_metrics_of(&t, &y, &d, 0.02).unwrap();
        assert!((m.rise_time_s.unwrap() - tau * 9f64.ln()).abs() < 1e-4);
        assert!((m.settling_time_s.unwrap() - tau * 50f64.ln()).abs() < 2e-3);
        assert!(m.max_overshoot_deg < 1e-9);
        assert!(m.steady_state_error_deg < 1e-9);
        assert!((m.robustness_delta_deg - 10.0).abs() < 1e-9);
    }

    #[test]
    fn unsettled_response_has_no_settling_time() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = (0..100).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = transient_metrics_of(&t, &y, &[false; 100], 0.02).unwrap();
        assert_eq!(m.settling_time_s, None);
    }

    #[test]
    fn flat_response_has_no_rise() {
        let t = [0.0, 0.1, 0.2];
        let m = transient_metrics_of(&t, &[1.0; 3], &[false; 3], 0.02).unwrap();
        assert_eq!(m.rise_time_s, None);
        assert_eq!(m.robustness_delta_deg, 0.0);
    }

    #[test]
    fn too_short_rejected() {
        assert!(transient_metrics_of(&[0.0], &[1.0], &[false], 0.02).is_err());
    }
}
