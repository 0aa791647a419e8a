//! Simulated robot: the identified linear model, or a nonlinear inverted
//! pendulum driven through a compliant, rate-limited ankle servo.
//!
//! Nonlinear-mode parameters are plausible kid-size values chosen for
//! simulation, not measurements of any particular robot.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statespace::{self, StateSpaceModel, StateVector, DIVERGENCE_LIMIT};

pub const GRAVITY: f64 = 9.81;

/// Foot half-length bounding the centre of pressure, m.
pub const DEFAULT_FOOT_HALF_LENGTH: f64 = 0.06;

/// Default servo stiffness as a fraction of the gravitational stiffness `m·g·l`.
/// Below one, the servo alone cannot hold the robot up.
pub const DEFAULT_STIFFNESS_RATIO: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantMode {
    Linear,
    #[default]
    Nonlinear,
}

/// Inverted pendulum on a position-controlled ankle.
///
/// `θ̈ = (g/l)·sin θ − c·θ̇/(m l²) + τ/(m l²) + bias`, where the ankle torque
/// `τ = clamp(k·(φ − θ), ±τ_max)` pulls the body toward the servo angle φ
/// and the servo tracks its command with a first-order lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumParams {
    /// kg
    pub com_mass: f64,
    /// m
    pub com_height: f64,
    /// s
    pub servo_time_constant: f64,
    /// N·m; defaults to `m·g·0.06` (centre of pressure at the toe or heel).
    pub ankle_torque_limit: Option<f64>,
    /// N·m·s/rad
    pub viscous_damping: f64,
    /// N·m/rad; defaults to `0.85·m·g·l`.
    pub servo_stiffness: Option<f64>,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            com_mass: 2.5,
            com_height: 0.25,
            servo_time_constant: 0.05,
            ankle_torque_limit: None,
            viscous_damping: 0.83,
            servo_stiffness: None,
        }
    }
}

impl PendulumParams {
    pub fn inertia(&self) -> f64 {
        self.com_mass * self.com_height * self.com_height
    }

    pub fn torque_limit(&self) -> f64 {
        self.ankle_torque_limit
            .unwrap_or(self.com_mass * GRAVITY * DEFAULT_FOOT_HALF_LENGTH)
    }

    pub fn stiffness(&self) -> f64 {
        self.servo_stiffness
            .unwrap_or(DEFAULT_STIFFNESS_RATIO * self.com_mass * GRAVITY * self.com_height)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("com_mass", self.com_mass),
            ("com_height", self.com_height),
            ("servo_time_constant", self.servo_time_constant),
            ("ankle_torque_limit", self.torque_limit()),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("{name}: must be positive, got {v}")));
            }
        }
        for (name, v) in [("viscous_damping", self.viscous_damping), ("servo_stiffness", self.stiffness())] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(format!("{name}: must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

fn default_model() -> StateSpaceModel {
    StateSpaceModel::identified()
}

fn default_efficiency() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    #[serde(default)]
    pub mode: PlantMode,
    /// Used in linear mode; defaults to the identified robot model.
    #[serde(default = "default_model")]
    pub model: StateSpaceModel,
    #[serde(default)]
    pub pendulum: PendulumParams,
    /// Gyro noise standard deviation, rad/s.
    #[serde(default)]
    pub gyro_noise_std: f64,
    /// Share of an impact's kinetic energy transferred to the robot.
    #[serde(default = "default_efficiency")]
    pub impulse_efficiency: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            mode: PlantMode::default(),
            model: default_model(),
            pendulum: PendulumParams::default(),
            gyro_noise_std: 0.0,
            impulse_efficiency: default_efficiency(),
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        self.pendulum.validate().map_err(|e| prefix("pendulum", e))?;
        if self.model.n_states() != 2 || self.model.n_inputs() != 1 || self.model.n_outputs() != 2 {
            return Err(Error::validation("model: plant needs 2 states, 1 input and 2 outputs"));
        }
        if !(self.gyro_noise_std.is_finite() && self.gyro_noise_std >= 0.0) {
            return Err(Error::validation("gyro_noise_std: must be nonnegative"));
        }
        if !(self.impulse_efficiency > 0.0 && self.impulse_efficiency <= 1.0) {
            return Err(Error::validation("impulse_efficiency: must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.model.dt()
    }

    /// Moment of inertia used to turn impact energy into a rate change.
    pub fn inertia_proxy(&self) -> f64 {
        self.pendulum.inertia()
    }
}

/// Prepends a field path to a validation message.
pub(crate) fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => {
            let head = m.split(':').next().unwrap_or("");
            let is_path = !head.is_empty() && head.len() < m.len() && !head.contains(' ');
            if is_path {
                let sep = if head.starts_with('[') { "" } else { "." };
                Error::validation(format!("{field}{sep}{m}"))
            } else {
                Error::validation(format!("{field}: {m}"))
            }
        }
        other => other,
    }
}

/// True plant state. θ in degrees, θ̇ in rad/s, servo angle in radians,
/// pivot position in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub theta: f64,
    pub theta_dot: f64,
    pub servo: f64,
    pub pivot_x: f64,
}

impl PlantState {
    pub fn at_rest(theta: f64) -> Self {
        Self { theta, ..Default::default() }
    }

    pub fn from_state(x: StateVector) -> Self {
        Self { theta: x.theta, theta_dot: x.theta_dot, ..Default::default() }
    }

    pub fn pitch(&self) -> StateVector {
        StateVector { theta: self.theta, theta_dot: self.theta_dot }
    }
}

/// Advances the plant by `dt` under ankle command `u_command` (degrees) and
/// an angular-acceleration bias (rad/s²).
pub fn plant_step(config: &PlantConfig, state: &PlantState, u_command: f64, bias: f64, dt: f64) -> Result<PlantState> {
    let next = match config.mode {
        PlantMode::Linear => {
            let x = statespace::step(
                &config.model,
                &state.pitch().to_vector(),
                &DVector::from_element(1, u_command),
            )?;
            let theta_dot = if bias != 0.0 { x[1] + bias * dt } else { x[1] };
            PlantState { theta: x[0], theta_dot, ..*state }
        }
        PlantMode::Nonlinear => pendulum_step(&config.pendulum, state, u_command, bias, dt),
    };
    let vals = [next.theta, next.theta_dot, next.servo];
    if vals.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::numerical("plant state diverged"));
    }
    Ok(next)
}

fn pendulum_step(p: &PendulumParams, s: &PlantState, u_command: f64, bias: f64, dt: f64) -> PlantState {
    let l = p.com_height;
    let inertia = p.inertia();
    let (k, tau_max, tau_s, c) = (p.stiffness(), p.torque_limit(), p.servo_time_constant, p.viscous_damping);
    let target = u_command.to_radians();
    let f = |x: [f64; 3]| {
        let [th, om, ph] = x;
        let torque = (k * (ph - th)).clamp(-tau_max, tau_max);
        [
            om,
            GRAVITY / l * th.sin() - c * om / inertia + torque / inertia + bias,
            (target - ph) / tau_s,
        ]
    };
    let add = |x: [f64; 3], d: [f64; 3], h: f64| [x[0] + h * d[0], x[1] + h * d[1], x[2] + h * d[2]];
    let x0 = [s.theta.to_radians(), s.theta_dot, s.servo];
    let k1 = f(x0);
    let k2 = f(add(x0, k1, dt / 2.0));
    let k3 = f(add(x0, k2, dt / 2.0));
    let k4 = f(add(x0, k3, dt));
    let x1: [f64; 3] = std::array::from_fn(|i| x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    PlantState { theta: x1[0].to_degrees(), theta_dot: x1[1], servo: x1[2], pivot_x: s.pivot_x }
}

/// Push direction. A push from the front drives θ negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Front,
    Back,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Front => -1.0,
            Direction::Back => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Disturbance {
    /// Impact delivering kinetic energy `energy_j` (J).
    Impulse {
        energy_j: f64,
        #[serde(default)]
        direction: Direction,
    },
    /// Sustained pull, expressed as an angular-acceleration bias (rad/s²).
    Constant {
        accel: f64,
        duration_s: f64,
        #[serde(default)]
        direction: Direction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceEvent {
    /// s
    pub at_time: f64,
    #[serde(flatten)]
    pub kind: Disturbance,
}

impl DisturbanceEvent {
    pub fn validate(&self) -> Result<()> {
        if !(self.at_time.is_finite() && self.at_time >= 0.0) {
            return Err(Error::validation("at_time: must be nonnegative"));
        }
        let ok = match self.kind {
            Disturbance::Impulse { energy_j, .. } => energy_j.is_finite() && energy_j >= 0.0,
            Disturbance::Constant { accel, duration_s, .. } => {
                accel.is_finite() && accel >= 0.0 && duration_s.is_finite() && duration_s >= 0.0
            }
        };
        if !ok {
            return Err(Error::validation("magnitudes must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Magnitude in the event's own unit (J or rad/s²).
    pub fn magnitude(&self) -> f64 {
        match self.kind {
            Disturbance::Impulse { energy_j, .. } => energy_j,
            Disturbance::Constant { accel, .. } => accel,
        }
    }

    pub fn with_magnitude(mut self, magnitude: f64) -> Self {
        match &mut self.kind {
            Disturbance::Impulse { energy_j, .. } => *energy_j = magnitude,
            Disturbance::Constant { accel, .. } => *accel = magnitude,
        }
        self
    }

    /// Signed bias contributed at time `t`, rad/s².
    pub fn bias_at(&self, t: f64) -> f64 {
        match self.kind {
            Disturbance::Constant { accel, duration_s, direction } if t >= self.at_time && t < self.at_time + duration_s => {
                direction.sign() * accel
            }
            _ => 0.0,
        }
    }
}

/// Rate change from an impact: `½·I·Δθ̇² = η·KE`.
pub fn impulse_rate_change(energy_j: f64, efficiency: f64, inertia: f64) -> f64 {
    (2.0 * efficiency * energy_j / inertia).sqrt()
}

/// Applies an impulse event to the state. Constant events act through the
/// bias passed to [`plant_step`] and leave the state unchanged here.
pub fn inject_disturbance(event: &DisturbanceEvent, state: &PlantState, efficiency: f64, inertia_proxy: f64) -> PlantState {
    match event.kind {
        Disturbance::Impulse { energy_j, direction } if energy_j > 0.0 => PlantState {
            theta_dot: state.theta_dot + direction.sign() * impulse_rate_change(energy_j, efficiency, inertia_proxy),
            ..*state
        },
        _ => *state,
    }
}

/// Emulated IMU: exact angle, gyro rate with additive Gaussian noise.
pub fn sense<R: Rng + ?Sized>(state: &StateVector, gyro_noise_std: f64, rng: &mut R) -> StateVector {
    let noise = if gyro_noise_std > 0.0 {
        Normal::new(0.0, gyro_noise_std).expect("finite positive std").sample(rng)
    } else {
        0.0
    };
    StateVector { theta: state.theta, theta_dot: state.theta_dot + noise }
}

/// Kinetic energy at the bottom of a pendulum swing released from `amplitude_deg`.
pub fn pendulum_kinetic_energy(mass: f64, length: f64, amplitude_deg: f64) -> f64 {
    mass * GRAVITY * length * (1.0 - amplitude_deg.to_radians().cos())
}

/// Foot placement surrogate: the pivot moves under the CoM, removing the
/// lean while keeping the CoM's horizontal velocity.
pub fn relocate_pivot(config: &PlantConfig, state: &PlantState, amplitude_x: f64) -> PlantState {
    let theta_dot = match config.mode {
        PlantMode::Nonlinear => state.theta_dot * state.theta.to_radians().cos(),
        PlantMode::Linear => state.theta_dot,
    };
    PlantState { theta: 0.0, theta_dot, servo: state.servo, pivot_x: state.pivot_x + amplitude_x }
}
