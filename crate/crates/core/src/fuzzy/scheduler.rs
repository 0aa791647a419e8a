use std::path::Path;

use serde::{Deserialize, Serialize};

use super::defuzz::defuzzify;
use super::membership::{fuzzify, MFPartition, TrapezoidMF};
use super::rules::{infer, RuleTable};
use super::tables;
use crate::error::{Error, Result};

/// Medium-row gains, used until the first successful defuzzification.
pub const INITIAL_GAINS: (f64, f64) = (2.743, 0.506);

/// Which input drives the rows of the rule grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowInput {
    Angle,
    Velocity,
}

/// Two parallel fuzzy systems mapping (θ, θ̇) to (K_θ, K_θ̇).
///
/// Inputs are bound to rule axes by cardinality: the input whose membership
/// count equals the grid's row count drives the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GainScheduler {
    angle: MFPartition,
    velocity: MFPartition,
    angle_gain: MFPartition,
    velocity_gain: MFPartition,
    angle_gain_rules: RuleTable,
    velocity_gain_rules: RuleTable,
    row_input: RowInput,
    last_gains: (f64, f64),
}

fn bind(rules: &RuleTable, field: &str, angle: usize, velocity: usize) -> Result<RowInput> {
    let (r, c) = (rules.rows(), rules.cols());
    if r == angle && c == velocity {
        Ok(RowInput::Angle)
    } else if r == velocity && c == angle {
        Ok(RowInput::Velocity)
    } else {
        Err(Error::validation(format!(
            "{field}: grid is {r}x{c} but the inputs have {angle} (angle) and {velocity} (velocity) memberships"
        )))
    }
}

impl GainScheduler {
    pub fn new(
        angle: MFPartition,
        velocity: MFPartition,
        angle_gain: MFPartition,
        velocity_gain: MFPartition,
        angle_gain_rules: RuleTable,
        velocity_gain_rules: RuleTable,
    ) -> Result<Self> {
        let row_input = bind(&angle_gain_rules, "angle_gain_rules", angle.len(), velocity.len())?;
        let other = bind(&velocity_gain_rules, "velocity_gain_rules", angle.len(), velocity.len())?;
        if other != row_input {
            return Err(Error::validation(
                "velocity_gain_rules: axis binding differs from angle_gain_rules",
            ));
        }
        for (field, rules, out) in [
            ("angle_gain_rules", &angle_gain_rules, &angle_gain),
            ("velocity_gain_rules", &velocity_gain_rules, &velocity_gain),
        ] {
            if rules.max_output() > out.len() {
                return Err(Error::validation(format!(
                    "{field}: references output {} but the output partition has {} memberships",
                    rules.max_output(),
                    out.len()
                )));
            }
        }
        Ok(Self {
            angle,
            velocity,
            angle_gain,
            velocity_gain,
            angle_gain_rules,
            velocity_gain_rules,
            row_input,
            last_gains: INITIAL_GAINS,
        })
    }

    /// The tuned tables used on the robot.
    pub fn shipped() -> Self {
        Self::new(
            tables::angle(),
            tables::velocity(),
            tables::angle_gain(),
            tables::velocity_gain(),
            tables::angle_gain_rules(),
            tables::velocity_gain_rules(),
        )
        .expect("shipped tables are consistent")
    }

    pub fn last_gains(&self) -> (f64, f64) {
        self.last_gains
    }

    pub fn row_input(&self) -> RowInput {
        self.row_input
    }

    pub fn angle_gain_partition(&self) -> &MFPartition {
        &self.angle_gain
    }

    pub fn velocity_gain_partition(&self) -> &MFPartition {
        &self.velocity_gain
    }

    /// Degree vectors for (angle, velocity) at the given operating point.
    pub fn fuzzify_inputs(&self, theta: f64, theta_dot: f64) -> (Vec<f64>, Vec<f64>) {
        (fuzzify(&self.angle, theta), fuzzify(&self.velocity, theta_dot))
    }

    /// Scheduled `(K_θ, K_θ̇)` for θ in degrees and θ̇ in rad/s.
    pub fn schedule_gains(&mut self, theta: f64, theta_dot: f64) -> (f64, f64) {
        let (da, dv) = self.fuzzify_inputs(theta, theta_dot);
        let (rows, cols) = match self.row_input {
            RowInput::Angle => (&da, &dv),
            RowInput::Velocity => (&dv, &da),
        };
        let run = |rules: &RuleTable, out: &MFPartition, fallback: f64| {
            infer(rules, rows, cols, out.len())
                .map(|y| defuzzify(out, &y, fallback))
                .unwrap_or(fallback)
        };
        let k_theta = run(&self.angle_gain_rules, &self.angle_gain, self.last_gains.0);
        let k_theta_dot = run(&self.velocity_gain_rules, &self.velocity_gain, self.last_gains.1);
        self.last_gains = (k_theta, k_theta_dot);
        self.last_gains
    }

    pub fn to_config(&self) -> FuzzyConfig {
        let corners = |p: &MFPartition| p.mfs().iter().map(TrapezoidMF::corners).collect();
        FuzzyConfig {
            angle_mfs: corners(&self.angle),
            velocity_mfs: corners(&self.velocity),
            angle_gain_mfs: corners(&self.angle_gain),
            velocity_gain_mfs: corners(&self.velocity_gain),
            angle_gain_rules: self.angle_gain_rules.grid().to_vec(),
            velocity_gain_rules: self.velocity_gain_rules.grid().to_vec(),
        }
    }
}

/// On-disk fuzzy system: corners `[b1, u1, u2, b2]` and 1-based rule grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyConfig {
    pub angle_mfs: Vec<[f64; 4]>,
    pub velocity_mfs: Vec<[f64; 4]>,
    pub angle_gain_mfs: Vec<[f64; 4]>,
    pub velocity_gain_mfs: Vec<[f64; 4]>,
    pub angle_gain_rules: Vec<Vec<usize>>,
    pub velocity_gain_rules: Vec<Vec<usize>>,
}

fn partition(field: &str, units: &str, corners: &[[f64; 4]]) -> Result<MFPartition> {
    let mfs = corners
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            TrapezoidMF::try_from(c).map_err(|e| match e {
                Error::Validation(m) => Error::validation(format!("{field}[{i}]: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MFPartition::new(field, units, mfs)
}

fn rules(field: &str, grid: &[Vec<usize>], n_outputs: usize) -> Result<RuleTable> {
    RuleTable::new(grid.to_vec(), n_outputs).map_err(|e| match e {
        Error::Validation(m) if m.starts_with('[') => Error::validation(format!("{field}{m}")),
        Error::Validation(m) => Error::validation(format!("{field}: {m}")),
        other => other,
    })
}

impl FuzzyConfig {
    pub fn shipped() -> Self {
        GainScheduler::shipped().to_config()
    }

    /// Checks every invariant and builds the scheduler.
    pub fn build(&self) -> Result<GainScheduler> {
        let angle_gain = partition("angle_gain_mfs", "deg/deg", &self.angle_gain_mfs)?;
        let velocity_gain = partition("velocity_gain_mfs", "deg/(rad/s)", &self.velocity_gain_mfs)?;
        let angle_gain_rules = rules("angle_gain_rules", &self.angle_gain_rules, angle_gain.len())?;
        let velocity_gain_rules = rules("velocity_gain_rules", &self.velocity_gain_rules, velocity_gain.len())?;
        GainScheduler::new(
            partition("angle_mfs", "deg", &self.angle_mfs)?,
            partition("velocity_mfs", "rad/s", &self.velocity_mfs)?,
            angle_gain,
            velocity_gain,
            angle_gain_rules,
            velocity_gain_rules,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
