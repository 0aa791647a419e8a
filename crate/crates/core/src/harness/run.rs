use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenario::{ControllerMode, ScenarioConfig};
use crate::capture::{capture_point_step, stepping_command, CapturePointState};
use crate::error::Result;
use crate::fuzzy::{FuzzyConfig, GainScheduler};
use crate::kalman::{design_filter, filter_step, FilterDesign};
use crate::lqr::{control_law, design_controller, CostPair};
use crate::plant::{inject_disturbance, plant_step, relocate_pivot, sense, Disturbance, PlantState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Stood,
    Fell,
}

/// One control period. Angles in degrees, rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub theta_true: f64,
    pub theta_dot_true: f64,
    pub theta_meas: f64,
    pub theta_dot_meas: f64,
    pub theta_hat: f64,
    pub theta_dot_hat: f64,
    /// Control delta on the neutral posture.
    pub u: f64,
    pub k_theta: f64,
    pub k_theta_dot: f64,
    pub x_cp: f64,
    pub step_active: bool,
    pub disturbance: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub dt: f64,
    pub records: Vec<TraceRecord>,
    pub outcome: Outcome,
}

impl SimTrace {
    pub fn theta(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.theta_true).collect()
    }

    pub fn max_abs_theta(&self) -> f64 {
        self.records.iter().map(|r| r.theta_true.abs()).fold(0.0, f64::max)
    }

    pub fn steps_taken(&self) -> usize {
        self.records.iter().filter(|r| r.step_active).count()
    }
}

enum Gains {
    Zero,
    Fixed(DMatrix<f64>),
    Fuzzy(Box<GainScheduler>),
}

impl Gains {
    fn at(&mut self, x_hat: &DVector<f64>) -> (f64, f64) {
        match self {
            Gains::Zero => (0.0, 0.0),
            Gains::Fixed(k) => (k[(0, 0)], k[(0, 1)]),
            Gains::Fuzzy(s) => s.schedule_gains(x_hat[0], x_hat[1]),
        }
    }
}

/// Filter design used by every run of this scenario.
pub fn scenario_filter(cfg: &ScenarioConfig) -> Result<FilterDesign> {
    design_filter(&cfg.plant.model, &cfg.estimator.covariances()?)
}

/// Runs the closed loop: disturb → sense → schedule gains → control law →
/// capture point → estimator update → plant step.
///
/// The control at step k uses the estimate built from measurements up to
/// step k − 1, as the predictor-form filter provides.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let model = &cfg.plant.model;
    let dt = model.dt();
    let filter = scenario_filter(cfg)?;
    let mut gains = match cfg.controller {
        ControllerMode::None => Gains::Zero,
        ControllerMode::LqrFixed => Gains::Fixed(design_controller(model, &CostPair::with_q11(cfg.fixed_q11)?)?.k),
        ControllerMode::LqrFuzzy => Gains::Fuzzy(Box::new(match &cfg.fuzzy {
            Some(f) => f.build()?,
            None => FuzzyConfig::shipped().build()?,
        })),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = PlantState::from_state(cfg.initial_state);
    let mut x_hat = cfg.initial_state.to_vector();
    let mut cp_state = CapturePointState::default();
    let refractory_steps = (cfg.capture_point.refractory_s / dt).round() as usize;
    let mut cooldown = 0usize;
    let inertia = cfg.plant.inertia_proxy();

    // first control period at or after each event time
    let event_step = |at: f64| (at / dt - 1e-9).ceil().max(0.0) as usize;
    let n_steps = (cfg.duration_s / dt).round().max(1.0) as usize;
    let mut records = Vec::with_capacity(n_steps);
    let mut outcome = Outcome::Stood;

    for k in 0..n_steps {
        let t = k as f64 * dt;
        let mut disturbed = false;
        let mut bias = 0.0;
        for ev in &cfg.disturbances {
            match ev.kind {
                Disturbance::Impulse { .. } if event_step(ev.at_time) == k => {
                    state = inject_disturbance(ev, &state, cfg.plant.impulse_efficiency, inertia);
                    disturbed = true;
                }
                Disturbance::Constant { .. } => {
                    let b = ev.bias_at(t);
                    if b != 0.0 {
                        bias += b;
                        disturbed = true;
                    }
                }
                _ => {}
            }
        }

        let truth = state.pitch();
        let meas = sense(&truth, cfg.plant.gyro_noise_std, &mut rng);
        let (k_theta, k_theta_dot) = gains.at(&x_hat);
        let k_row = DMatrix::from_row_slice(1, 2, &[k_theta, k_theta_dot]);
        let u = control_law(&k_row, &x_hat, cfg.u_limit_deg)[0];

        let (x_cp, next_cp) = capture_point_step(&cp_state, &cfg.capture_point.params, x_hat[1]);
        cp_state = next_cp;
        let mut step_active = false;
        if cfg.capture_point.enabled && cooldown == 0 {
            let cmd = stepping_command(x_cp, cfg.capture_point.support_threshold, cfg.capture_point.max_step);
            if cmd.active {
                state = relocate_pivot(&cfg.plant, &state, cmd.amplitude_x);
                step_active = true;
                cooldown = refractory_steps;
            }
        }
        cooldown = cooldown.saturating_sub(1);

        let fell = truth.theta.abs() > cfg.fall_threshold_deg;
        records.push(TraceRecord {
            t,
            theta_true: truth.theta,
            theta_dot_true: truth.theta_dot,
            theta_meas: meas.theta,
            theta_dot_meas: meas.theta_dot,
            theta_hat: x_hat[0],
            theta_dot_hat: x_hat[1],
            u,
            k_theta,
            k_theta_dot,
            x_cp,
            step_active,
            disturbance: disturbed,
        });
        if fell {
            outcome = Outcome::Fell;
            break;
        }

        let command = cfg.neutral_deg + u;
        let u_vec = DVector::from_element(1, command);
        x_hat = filter_step(&filter, model, &x_hat, &u_vec, &meas.to_vector())?;
        state = plant_step(&cfg.plant, &state, command, bias, dt)?;
    }

    Ok(SimTrace { dt, records, outcome })
}
