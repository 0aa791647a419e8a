//! Steady-state discrete Kalman filter in predictor form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, inverse};
use crate::riccati;
use crate::statespace::StateSpaceModel;

/// Process (`vd`) and measurement (`vn`) noise covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    vd: DMatrix<f64>,
    vn: DMatrix<f64>,
}

impl CovariancePair {
    pub fn new(vd: DMatrix<f64>, vn: DMatrix<f64>) -> Result<Self> {
        check_covariance("vd", &vd, false)?;
        check_covariance("vn", &vn, true)?;
        Ok(Self { vd, vn })
    }

    /// `vd = I₂`, `vn = diag(1e-6, vn22)`: the angle sensor is trusted, the
    /// gyro is not.
    pub fn with_vn22(vn22: f64) -> Result<Self> {
        Self::new(
            DMatrix::identity(2, 2),
            DMatrix::from_diagonal(&DVector::from_column_slice(&[1e-6, vn22])),
        )
    }

    /// The tuned design used on the robot (`vn22 = 35`).
    pub fn shipped() -> Self {
        Self::with_vn22(35.0).expect("shipped covariances are valid")
    }

    pub fn vd(&self) -> &DMatrix<f64> {
        &self.vd
    }

    pub fn vn(&self) -> &DMatrix<f64> {
        &self.vn
    }
}

fn check_covariance(name: &str, m: &DMatrix<f64>, definite: bool) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::validation(format!("{name}: must be a nonempty square matrix")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(format!("{name}: non-finite entry")));
    }
    if !linalg::is_symmetric(m, 1e-12) {
        return Err(Error::validation(format!("{name}: not symmetric")));
    }
    let min_eig = linalg::min_symmetric_eigenvalue(m);
    let scale = m.amax().max(1.0);
    if definite && min_eig <= 0.0 {
        return Err(Error::validation(format!(
            "{name}: not positive definite (smallest eigenvalue {min_eig:e})"
        )));
    }
    if !definite && min_eig < -1e-12 * scale {
        return Err(Error::validation(format!(
            "{name}: not positive semidefinite (smallest eigenvalue {min_eig:e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FilterDesign {
    /// n×p gain on the innovation.
    pub kf: DMatrix<f64>,
    pub p_riccati: DMatrix<f64>,
    /// Spectral radius of `A − Kf·C`, the estimation-error dynamics.
    pub closed_loop_radius: f64,
    pub iterations: usize,
}

fn check_dims(model: &StateSpaceModel, cov: &CovariancePair) -> Result<()> {
    let (n, p) = (model.n_states(), model.n_outputs());
    if cov.vd.nrows() != n {
        return Err(Error::validation(format!("vd: expected {n}x{n}, got {}x{}", cov.vd.nrows(), cov.vd.ncols())));
    }
    if cov.vn.nrows() != p {
        return Err(Error::validation(format!("vn: expected {p}x{p}, got {}x{}", cov.vn.nrows(), cov.vn.ncols())));
    }
    Ok(())
}

/// Solves `P = APAᵀ + Vd − APCᵀ(Vn + CPCᵀ)⁻¹CPAᵀ` by fixed-point iteration from `Vd`.
pub fn solve_filter_riccati(model: &StateSpaceModel, cov: &CovariancePair) -> Result<DMatrix<f64>> {
    Ok(solve(model, cov)?.p)
}

fn solve(model: &StateSpaceModel, cov: &CovariancePair) -> Result<riccati::Solution> {
    check_dims(model, cov)?;
    riccati::solve(
        &model.a().transpose(),
        &model.c().transpose(),
        &cov.vd,
        &cov.vn,
        &cov.vd,
    )
}

/// Frobenius norm of the filter Riccati equation residual at `p`.
pub fn filter_riccati_residual(model: &StateSpaceModel, cov: &CovariancePair, p: &DMatrix<f64>) -> Result<f64> {
    check_dims(model, cov)?;
    riccati::residual(&model.a().transpose(), &model.c().transpose(), &cov.vd, &cov.vn, p)
}

/// `Kf = APCᵀ(Vn + CPCᵀ)⁻¹`.
pub fn filter_gain(model: &StateSpaceModel, p_riccati: &DMatrix<f64>, cov: &CovariancePair) -> Result<DMatrix<f64>> {
    check_dims(model, cov)?;
    let (a, c) = (model.a(), model.c());
    let pct = p_riccati * c.transpose();
    let innovation = c * &pct + &cov.vn;
    Ok(a * pct * inverse(&innovation, "innovation covariance Vn + CPCᵀ")?)
}

/// Full design; rejects a gain whose error dynamics are not Schur stable.
pub fn design_filter(model: &StateSpaceModel, cov: &CovariancePair) -> Result<FilterDesign> {
    let sol = solve(model, cov)?;
    let kf = filter_gain(model, &sol.p, cov)?;
    let closed_loop_radius = linalg::spectral_radius(&(model.a() - &kf * model.c()))?;
    if closed_loop_radius >= 1.0 {
        return Err(Error::numerical(format!(
            "filter error dynamics unstable (spectral radius {closed_loop_radius:.6})"
        )));
    }
    Ok(FilterDesign {
        kf,
        p_riccati: sol.p,
        closed_loop_radius,
        iterations: sol.iterations,
    })
}

/// One predictor update: `x̂' = A·x̂ + B·u + Kf·(y − C·x̂)`.
pub fn filter_step(
    design: &FilterDesign,
    model: &StateSpaceModel,
    x_hat: &DVector<f64>,
    u: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    if x_hat.len() != model.n_states() || u.len() != model.n_inputs() || y.len() != model.n_outputs() {
        return Err(Error::validation("filter_step: dimension mismatch"));
    }
    if x_hat.iter().chain(u.iter()).chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::validation("filter_step: non-finite input"));
    }
    let innovation = y - model.c() * x_hat;
    Ok(model.a() * x_hat + model.b() * u + &design.kf * innovation)
}
