use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::capture::CapturePointParams;
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyConfig;
use crate::kalman::CovariancePair;
use crate::linalg;
use crate::lqr::DEFAULT_U_LIMIT;
use crate::plant::{prefix, DisturbanceEvent, PlantConfig};
use crate::statespace::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    None,
    LqrFixed,
    #[default]
    LqrFuzzy,
}

/// Noise model for the estimator: either the single gyro-noise knob or
/// full matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub vn22: f64,
    pub vd: Option<Vec<Vec<f64>>>,
    pub vn: Option<Vec<Vec<f64>>>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { vn22: 35.0, vd: None, vn: None }
    }
}

impl EstimatorConfig {
    pub fn covariances(&self) -> Result<CovariancePair> {
        let base = CovariancePair::with_vn22(self.vn22).map_err(|e| prefix("vn22", strip(e)))?;
        let mat = |rows: &Option<Vec<Vec<f64>>>, name: &str, dflt: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            match rows {
                Some(r) => linalg::from_rows(r).map_err(|e| prefix(name, strip(e))),
                None => Ok(dflt.clone()),
            }
        };
        let vd = mat(&self.vd, "vd", base.vd())?;
        let vn = mat(&self.vn, "vn", base.vn())?;
        CovariancePair::new(vd, vn)
    }
}

fn strip(e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(m.trim_start_matches("vn: ").trim_start_matches("vd: ").to_string()),
        other => other,
    }
}

fn default_refractory() -> f64 {
    // one step at a 1.6 Hz gait
    0.625
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureConfig {
    pub enabled: bool,
    pub params: CapturePointParams,
    /// |x_cp| beyond which a step is requested, m.
    pub support_threshold: f64,
    /// m
    pub max_step: f64,
    /// Minimum time between steps, s.
    #[serde(default = "default_refractory")]
    pub refractory_s: f64,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            params: CapturePointParams::default(),
            support_threshold: 0.05,
            max_step: 0.08,
            refractory_s: default_refractory(),
        }
    }
}

/// Bisection settings for the increase-until-fall search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub min: f64,
    pub max: f64,
    pub resolution: f64,
    pub trials: usize,
    pub pass_fraction: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { min: 0.0, max: 10.0, resolution: 0.01, trials: 1, pass_fraction: 1.0 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min >= 0.0 && self.max > self.min) {
            return Err(Error::validation("tolerance: need 0 <= min < max"));
        }
        if self.resolution.is_nan() || self.resolution <= 0.0 {
            return Err(Error::validation("tolerance.resolution: must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::validation("tolerance.trials: must be at least 1"));
        }
        if !(self.pass_fraction > 0.0 && self.pass_fraction <= 1.0) {
            return Err(Error::validation("tolerance.pass_fraction: must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn default_q11() -> f64 {
    40.0
}

fn default_fall() -> f64 {
    45.0
}

fn default_u_limit() -> f64 {
    DEFAULT_U_LIMIT
}

/// Everything needed to run one closed-loop experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub plant: PlantConfig,
    #[serde(default)]
    pub controller: ControllerMode,
    /// Angle weight of the fixed-gain design.
    #[serde(default = "default_q11")]
    pub fixed_q11: f64,
    /// Fuzzy tables; the shipped ones when absent.
    #[serde(default)]
    pub fuzzy: Option<FuzzyConfig>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Ankle command saturation, degrees.
    #[serde(default = "default_u_limit")]
    pub u_limit_deg: f64,
    #[serde(default)]
    pub capture_point: CaptureConfig,
    #[serde(default)]
    pub disturbances: Vec<DisturbanceEvent>,
    pub duration_s: f64,
    #[serde(default)]
    pub initial_state: StateVector,
    /// Standing ankle posture the control delta is added to, degrees.
    #[serde(default)]
    pub neutral_deg: f64,
    #[serde(default = "default_fall")]
    pub fall_threshold_deg: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Option<ToleranceConfig>,
}

impl ScenarioConfig {
    /// A quiet nonlinear-plant scenario with default controller settings.
    pub fn new(duration_s: f64) -> Self {
        Self {
            name: String::new(),
            plant: PlantConfig::default(),
            controller: ControllerMode::default(),
            fixed_q11: default_q11(),
            fuzzy: None,
            estimator: EstimatorConfig::default(),
            u_limit_deg: DEFAULT_U_LIMIT,
            capture_point: CaptureConfig::default(),
            disturbances: Vec::new(),
            duration_s,
            initial_state: StateVector::ZERO,
            neutral_deg: 0.0,
            fall_threshold_deg: default_fall(),
            seed: 0,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::validation("duration_s: must be positive"));
        }
        self.plant.validate().map_err(|e| prefix("plant", e))?;
        if let Some(f) = &self.fuzzy {
            f.build().map_err(|e| prefix("fuzzy", e))?;
        }
        self.estimator.covariances().map_err(|e| prefix("estimator", e))?;
        if !(self.fixed_q11.is_finite() && self.fixed_q11 >= 0.0) {
            return Err(Error::validation("fixed_q11: must be nonnegative"));
        }
        if !(self.u_limit_deg.is_finite() && self.u_limit_deg >= 0.0) {
            return Err(Error::validation("u_limit_deg: must be nonnegative"));
        }
        if !(self.fall_threshold_deg.is_finite() && self.fall_threshold_deg > 0.0) {
            return Err(Error::validation("fall_threshold_deg: must be positive"));
        }
        let cp = &self.capture_point;
        cp.params.validate().map_err(|e| prefix("capture_point.params", e))?;
        if !(cp.support_threshold > 0.0 && cp.max_step > 0.0 && cp.refractory_s >= 0.0) {
            return Err(Error::validation(
                "capture_point: support_threshold and max_step must be positive, refractory_s nonnegative",
            ));
        }
        for (i, ev) in self.disturbances.iter().enumerate() {
            ev.validate().map_err(|e| prefix(&format!("disturbances[{i}]"), e))?;
        }
        if let Some(t) = &self.tolerance {
            t.validate()?;
        }
        StateVector::new(self.initial_state.theta, self.initial_state.theta_dot)
            .map_err(|e| prefix("initial_state", e))?;
        Ok(())
    }

    /// Parses and validates a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy with every disturbance scaled to `magnitude`.
    pub fn with_disturbance_magnitude(&self, magnitude: f64) -> Self {
        let mut c = self.clone();
        for ev in &mut c.disturbances {
            *ev = ev.with_magnitude(magnitude);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(r#"{"duration_s": 2.0}"#).unwrap();
        assert_eq!(cfg, ScenarioConfig::new(2.0));
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_field_rejected() {
        let err = serde_json::from_str::<ScenarioConfig>(r#"{"duration_s": 2.0, "durations": 1}"#).unwrap_err();
        assert!(err.to_string().contains("durations"));
    }

    #[test]
    fn zero_gyro_noise_entry_is_not_definite() {
        let mut cfg = ScenarioConfig::new(1.0);
        cfg.estimator.vn = Some(vec![vec![1e-6, 0.0], vec![0.0, 0.0]]);
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("estimator") && msg.contains("positive definite"), "{msg}");
    }

    #[test]
    fn nested_errors_carry_paths() {
        let mut cfg = ScenarioConfig::new(1.0);
        cfg.plant.pendulum.com_height = -1.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("plant.pendulum.com_height"));
        let mut cfg = ScenarioConfig::new(0.0);
        cfg.duration_s = 0.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("duration_s"));
    }
}
