//! Discrete-time linear state-space models.
//!
//! Unit convention for the pitch plant: θ in degrees, θ̇ in rad/s, ankle
//! command in degrees. Identification absorbs any cross-unit scaling into
//! `A` and `B`, so models operate directly on sensor-native units.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// States whose magnitude exceeds this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// `x[k+1] = A x[k] + B u[k]`, `y[k] = C x[k]`, sampled at `sample_rate` Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    sample_rate: f64,
}

/// On-disk layout: row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub sample_rate_hz: f64,
}

impl TryFrom<ModelFile> for StateSpaceModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let a = linalg::from_rows(&f.a).map_err(|e| prefix("a", e))?;
        let b = linalg::from_rows(&f.b).map_err(|e| prefix("b", e))?;
        let c = linalg::from_rows(&f.c).map_err(|e| prefix("c", e))?;
        StateSpaceModel::new(a, b, c, f.sample_rate_hz)
    }
}

impl From<StateSpaceModel> for ModelFile {
    fn from(m: StateSpaceModel) -> Self {
        ModelFile {
            a: linalg::to_rows(&m.a),
            b: linalg::to_rows(&m.b),
            c: linalg::to_rows(&m.c),
            sample_rate_hz: m.sample_rate,
        }
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Validation(msg) => Error::Validation(format!("{field}: {msg}")),
        other => other,
    }
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, sample_rate: f64) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::validation(format!(
                "a: must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::validation(format!(
                "b: expected {n} rows and at least one column, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::validation(format!(
                "c: expected {n} columns and at least one row, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::validation(format!(
                "sample_rate_hz: must be positive, got {sample_rate}"
            )));
        }
        for (name, m) in [("a", &a), ("b", &b), ("c", &c)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("{name}: non-finite entry")));
            }
        }
        Ok(Self { a, b, c, sample_rate })
    }

    /// The identified pitch model of the kid-size robot (C = I, 41.664 Hz).
    pub fn identified() -> Self {
        Self {
            a: DMatrix::from_row_slice(2, 2, &[0.995, 0.021, -0.584, 0.879]),
            b: DMatrix::from_row_slice(2, 1, &[0.013, 1.416]),
            c: DMatrix::identity(2, 2),
            sample_rate: 41.664,
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn output(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_state(x)?;
        Ok(&self.c * x)
    }

    fn check_state(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n_states() {
            return Err(Error::validation(format!(
                "state has {} entries, model has {} states",
                x.len(),
                self.n_states()
            )));
        }
        Ok(())
    }

    fn check_input(&self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.n_inputs() {
            return Err(Error::validation(format!(
                "input has {} entries, model has {} inputs",
                u.len(),
                self.n_inputs()
            )));
        }
        Ok(())
    }
}

/// Pitch state of the robot: CoM angle (degrees) and angular velocity (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub theta: f64,
    pub theta_dot: f64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector { theta: 0.0, theta_dot: 0.0 };

    pub fn new(theta: f64, theta_dot: f64) -> Result<Self> {
        if !(theta.is_finite() && theta_dot.is_finite()) {
            return Err(Error::validation("state vector entries must be finite"));
        }
        Ok(Self { theta, theta_dot })
    }

    pub fn to_vector(self) -> DVector<f64> {
        DVector::from_column_slice(&[self.theta, self.theta_dot])
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() != 2 {
            return Err(Error::validation(format!(
                "pitch state needs 2 entries, got {}",
                v.len()
            )));
        }
        Self::new(v[0], v[1])
    }
}

/// Uniformly sampled input/output record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub sample_rate: f64,
    pub inputs: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, inputs: Vec<DVector<f64>>, outputs: Vec<DVector<f64>>) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::validation(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::validation(format!(
                "inputs ({}) and outputs ({}) differ in length",
                inputs.len(),
                outputs.len()
            )));
        }
        if inputs.is_empty() {
            return Err(Error::validation("time series is empty"));
        }
        Ok(Self { sample_rate, inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Output channel `i` as a scalar sequence.
    pub fn output_channel(&self, i: usize) -> Vec<f64> {
        self.outputs.iter().map(|y| y[i]).collect()
    }
}

/// One step of the state recursion: `A·x + B·u`.
pub fn step(model: &StateSpaceModel, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
    model.check_state(x)?;
    model.check_input(u)?;
    Ok(&model.a * x + &model.b * u)
}

/// Runs the model from `x0` over `u_seq`; `outputs[k] = C·x[k]`.
pub fn simulate(model: &StateSpaceModel, x0: &DVector<f64>, u_seq: &[DVector<f64>]) -> Result<TimeSeries> {
    if u_seq.is_empty() {
        return Err(Error::validation("input sequence is empty"));
    }
    model.check_state(x0)?;
    let mut x = x0.clone();
    let mut outputs = Vec::with_capacity(u_seq.len());
    for (k, u) in u_seq.iter().enumerate() {
        outputs.push(&model.c * &x);
        x = step(model, &x, u)?;
        if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::numerical(format!("state diverged at step {}", k + 1)));
        }
    }
    Ok(TimeSeries {
        sample_rate: model.sample_rate,
        inputs: u_seq.to_vec(),
        outputs,
    })
}

/// Steady-state output per unit constant input, `C (I − A)⁻¹ B`.
pub fn dc_gain(model: &StateSpaceModel) -> Result<DMatrix<f64>> {
    let n = model.n_states();
    let i_minus_a = DMatrix::identity(n, n) - &model.a;
    let lu = i_minus_a.lu();
    let sol = lu
        .solve(&model.b)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::numerical("I - A is singular: no finite DC gain (integrating plant)"))?;
    Ok(&model.c * sol)
}

/// Largest eigenvalue magnitude of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    linalg::spectral_radius(m)
}
