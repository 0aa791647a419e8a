//! Damped capture-point estimate and the stepping trigger built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative change in θ̂̇ below which the damping counter keeps counting.
pub const STEADY_RATE_CHANGE: f64 = 0.1;

/// Geometry of the linear inverted pendulum. Defaults are plausible for a
/// kid-size robot, not measured values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapturePointParams {
    /// CoM height, m.
    pub z_com: f64,
    /// m/s².
    pub g: f64,
    /// Calibration offset added to the estimate, m.
    pub x_offset: f64,
}

impl Default for CapturePointParams {
    fn default() -> Self {
        Self { z_com: 0.25, g: 9.81, x_offset: 0.0 }
    }
}

impl CapturePointParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_com.is_finite() && self.z_com > 0.0) {
            return Err(Error::validation(format!("z_com: must be positive, got {}", self.z_com)));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::validation(format!("g: must be positive, got {}", self.g)));
        }
        if !self.x_offset.is_finite() {
            return Err(Error::validation("x_offset: must be finite"));
        }
        Ok(())
    }
}

/// Memory carried between estimator calls.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CapturePointState {
    /// θ̂̇ seen on the previous call, rad/s.
    pub theta_dot_last: f64,
    /// Consecutive calls with a steady rate.
    pub counter_gyro: u32,
    /// Damped rate used for the last estimate, rad/s.
    pub theta_dot_cp: f64,
}

/// One estimator update from the filtered rate θ̂̇ (never the raw gyro).
///
/// A steady rate is increasingly discounted (`θ̂̇·e^(−counter)`) so slow
/// drift in the estimate does not trigger steps. A zero previous rate
/// counts as a change.
pub fn capture_point_step(
    state: &CapturePointState,
    params: &CapturePointParams,
    theta_dot_hat: f64,
) -> (f64, CapturePointState) {
    let last = state.theta_dot_last;
    let steady = last != 0.0 && ((theta_dot_hat - last) / last).abs() < STEADY_RATE_CHANGE;
    let counter_gyro = if steady { state.counter_gyro.saturating_add(1) } else { 0 };
    let theta_dot_cp = theta_dot_hat * (-f64::from(counter_gyro)).exp();
    let x_cp = theta_dot_cp * params.z_com * (params.z_com / params.g).sqrt() + params.x_offset;
    (
        x_cp,
        CapturePointState { theta_dot_last: theta_dot_hat, counter_gyro, theta_dot_cp },
    )
}

/// Foot-placement request.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepCommand {
    pub active: bool,
    /// Signed sagittal amplitude, m.
    pub amplitude_x: f64,
}

/// Step once the capture point leaves the support region.
pub fn stepping_command(x_cp: f64, support_threshold: f64, max_step: f64) -> StepCommand {
    if x_cp.abs() <= support_threshold {
        StepCommand::default()
    } else {
        StepCommand { active: true, amplitude_x: x_cp.clamp(-max_step, max_step) }
    }
}
