//! Infinite-horizon discrete LQR: Riccati solve, gain, saturated control law.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, inverse};
use crate::riccati;
use crate::statespace::StateSpaceModel;

/// Default ankle command saturation, degrees.
pub const DEFAULT_U_LIMIT: f64 = 30.0;

/// State (`q`) and input (`r`) weights of the quadratic cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostPair {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl CostPair {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        for (name, m, definite) in [("q", &q, false), ("r", &r, true)] {
            if !m.is_square() || m.nrows() == 0 || m.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("{name}: must be a finite nonempty square matrix")));
            }
            if !linalg::is_symmetric(m, 1e-12) {
                return Err(Error::validation(format!("{name}: not symmetric")));
            }
            let e = linalg::min_symmetric_eigenvalue(m);
            if definite && e <= 0.0 {
                return Err(Error::validation(format!("{name}: not positive definite")));
            }
            if !definite && e < -1e-12 * m.amax().max(1.0) {
                return Err(Error::validation(format!("{name}: not positive semidefinite")));
            }
        }
        Ok(Self { q, r })
    }

    /// `q = diag(q11, 1)`, `r = 1`: only the angle weight is tuned.
    pub fn with_q11(q11: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(&[q11, 1.0])),
            DMatrix::identity(1, 1),
        )
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }
}

#[derive(Debug, Clone)]
pub struct ControlDesign {
    /// m×n state-feedback gain.
    pub k: DMatrix<f64>,
    pub p_riccati: DMatrix<f64>,
    /// Spectral radius of `A − B·K`.
    pub closed_loop_radius: f64,
    pub iterations: usize,
}

fn check_dims(model: &StateSpaceModel, cost: &CostPair) -> Result<()> {
    let (n, m) = (model.n_states(), model.n_inputs());
    if cost.q.nrows() != n {
        return Err(Error::validation(format!("q: expected {n}x{n}, got {}x{}", cost.q.nrows(), cost.q.ncols())));
    }
    if cost.r.nrows() != m {
        return Err(Error::validation(format!("r: expected {m}x{m}, got {}x{}", cost.r.nrows(), cost.r.ncols())));
    }
    Ok(())
}

fn solve(model: &StateSpaceModel, cost: &CostPair) -> Result<riccati::Solution> {
    check_dims(model, cost)?;
    riccati::solve(model.a(), model.b(), &cost.q, &cost.r, &cost.q)
}

/// Solves `AᵀPA − P − AᵀPB(BᵀPB + R)⁻¹BᵀPA + Q = 0` by fixed-point iteration from `Q`.
pub fn solve_control_riccati(model: &StateSpaceModel, cost: &CostPair) -> Result<DMatrix<f64>> {
    Ok(solve(model, cost)?.p)
}

pub fn control_riccati_residual(model: &StateSpaceModel, cost: &CostPair, p: &DMatrix<f64>) -> Result<f64> {
    check_dims(model, cost)?;
    riccati::residual(model.a(), model.b(), &cost.q, &cost.r, p)
}

/// `K = (BᵀPB + R)⁻¹BᵀPA`.
pub fn control_gain(model: &StateSpaceModel, p_riccati: &DMatrix<f64>, cost: &CostPair) -> Result<DMatrix<f64>> {
    check_dims(model, cost)?;
    let bt_p = model.b().transpose() * p_riccati;
    let s = &bt_p * model.b() + &cost.r;
    Ok(inverse(&s, "BᵀPB + R")? * bt_p * model.a())
}

/// Full design; rejects a gain that does not stabilize the model.
pub fn design_controller(model: &StateSpaceModel, cost: &CostPair) -> Result<ControlDesign> {
    let sol = solve(model, cost)?;
    let k = control_gain(model, &sol.p, cost)?;
    let closed_loop_radius = linalg::spectral_radius(&(model.a() - model.b() * &k))?;
    if closed_loop_radius >= 1.0 {
        return Err(Error::numerical(format!(
            "closed loop unstable (spectral radius {closed_loop_radius:.6})"
        )));
    }
    Ok(ControlDesign {
        k,
        p_riccati: sol.p,
        closed_loop_radius,
        iterations: sol.iterations,
    })
}

/// `u = clamp(−K·x̂, ±u_limit)`, a delta on the neutral ankle posture.
pub fn control_law(k: &DMatrix<f64>, x_hat: &DVector<f64>, u_limit: f64) -> DVector<f64> {
    let lim = u_limit.max(0.0);
    (-(k * x_hat)).map(|u| u.clamp(-lim, lim))
}

/// `½ Σ (xᵀQx + uᵀRu)` over a finite trace.
pub fn quadratic_cost(xs: &[DVector<f64>], us: &[DVector<f64>], cost: &CostPair) -> Result<f64> {
    if xs.len() != us.len() {
        return Err(Error::validation(format!(
            "state and input traces differ in length ({} vs {})",
            xs.len(),
            us.len()
        )));
    }
    let mut total = 0.0;
    for (x, u) in xs.iter().zip(us) {
        if x.len() != cost.q.nrows() || u.len() != cost.r.nrows() {
            return Err(Error::validation("trace sample does not match cost dimensions"));
        }
        total += (x.transpose() * &cost.q * x)[(0, 0)] + (u.transpose() * &cost.r * u)[(0, 0)];
    }
    Ok(0.5 * total)
}

/// Transition matrix of plant plus estimator-based feedback, state `[x; x̂]`:
///
/// ```text
/// x'  = A x − B K x̂
/// x̂' = Kf C x + (A − B K − Kf C) x̂
/// ```
pub fn observer_feedback_matrix(model: &StateSpaceModel, k: &DMatrix<f64>, kf: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = model.n_states();
    if k.shape() != (model.n_inputs(), n) || kf.shape() != (n, model.n_outputs()) {
        return Err(Error::validation("gain dimensions do not match the model"));
    }
    let (a, b, c) = (model.a(), model.b(), model.c());
    let bk = b * k;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(&(-&bk));
    m.view_mut((n, 0), (n, n)).copy_from(&(kf * c));
    m.view_mut((n, n), (n, n)).copy_from(&(a - &bk - kf * c));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kalman::{design_filter, CovariancePair};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn gains_match_tuned_rows() {
        let m = StateSpaceModel::identified();
        for (q11, kt, kd) in [(40.0, 2.743, 0.506), (75.0, 3.806, 0.526)] {
            let d = design_controller(&m, &CostPair::with_q11(q11).unwrap()).unwrap();
            assert!((d.k[(0, 0)] - kt).abs() < 0.01, "q11={q11}: {}", d.k);
            assert!((d.k[(0, 1)] - kd).abs() < 0.01, "q11={q11}: {}", d.k);
        }
    }

    #[test]
    fn zero_state_cost_on_stable_plant() {
        let m = StateSpaceModel::identified();
        let cost = CostPair::new(DMatrix::zeros(2, 2), DMatrix::identity(1, 1)).unwrap();
        let p = solve_control_riccati(&m, &cost).unwrap();
        assert!(p.amax() < 1e-12);
        assert!(control_gain(&m, &DMatrix::zeros(2, 2), &cost).unwrap().amax() == 0.0);
    }

    #[test]
    fn scalar_closed_form() {
        // p = 0.25p − 0.25p²/(p + 1) + 1  ⇒  p² − 0.25p − 1 = 0
        let one = DMatrix::from_element(1, 1, 1.0);
        let m = StateSpaceModel::new(DMatrix::from_element(1, 1, 0.5), one.clone(), one.clone(), 1.0).unwrap();
        let cost = CostPair::new(one.clone(), one).unwrap();
        let p = solve_control_riccati(&m, &cost).unwrap()[(0, 0)];
        let exact = (0.25 + (0.0625f64 + 4.0).sqrt()) / 2.0;
        assert!((p - exact).abs() < 1e-12);
    }

    #[test]
    fn gain_grows_with_angle_weight() {
        let m = StateSpaceModel::identified();
        let mut last = 0.0;
        for q11 in [30.0, 40.0, 50.0, 75.0] {
            let d = design_controller(&m, &CostPair::with_q11(q11).unwrap()).unwrap();
            assert!(d.closed_loop_radius < 1.0);
            assert!(control_riccati_residual(&m, &CostPair::with_q11(q11).unwrap(), &d.p_riccati).unwrap() < 1e-9);
            assert!(d.k[(0, 0)] > last);
            last = d.k[(0, 0)];
        }
    }

    #[test]
    fn control_law_cases() {
        let k = DMatrix::from_row_slice(1, 2, &[2.743, 0.506]);
        assert_eq!(control_law(&k, &v(&[0.0, 0.0]), 30.0)[0], 0.0);
        assert!((control_law(&k, &v(&[-10.0, 0.0]), 30.0)[0] - 27.43).abs() < 1e-12);
        assert_eq!(control_law(&k, &v(&[-10.0, 0.0]), 20.0)[0], 20.0);
        assert_eq!(control_law(&k, &v(&[-10.0, 3.0]), 0.0)[0], 0.0);
    }

    #[test]
    fn quadratic_cost_cases() {
        let cost = CostPair::with_q11(40.0).unwrap();
        assert_eq!(quadratic_cost(&[v(&[0.0, 0.0])], &[v(&[0.0])], &cost).unwrap(), 0.0);
        assert_eq!(quadratic_cost(&[v(&[1.0, 0.0])], &[v(&[0.0])], &cost).unwrap(), 20.0);
        assert!(quadratic_cost(&[v(&[1.0, 0.0])], &[], &cost).is_err());
    }

    fn closed_loop_cost(m: &StateSpaceModel, k: &DMatrix<f64>, cost: &CostPair, x0: &DVector<f64>) -> f64 {
        let mut x = x0.clone();
        let (mut xs, mut us) = (Vec::new(), Vec::new());
        for _ in 0..3000 {
            let u = -(k * &x);
            xs.push(x.clone());
            us.push(u.clone());
            x = m.a() * &x + m.b() * u;
        }
        quadratic_cost(&xs, &us, cost).unwrap()
    }

    #[test]
    fn optimal_gain_beats_random_stabilizing_gains() {
        let m = StateSpaceModel::identified();
        let cost = CostPair::with_q11(40.0).unwrap();
        let d = design_controller(&m, &cost).unwrap();
        let x0 = v(&[-10.0, 0.5]);
        let best = closed_loop_cost(&m, &d.k, &cost, &x0);
        // infinite-horizon optimum equals ½ x0ᵀ P x0
        let half_xpx = 0.5 * (x0.transpose() * &d.p_riccati * &x0)[(0, 0)];
        assert!((best - half_xpx).abs() < 1e-6 * half_xpx);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tried = 0;
        while tried < 100 {
            let k = DMatrix::from_row_slice(1, 2, &[rng.random_range(-1.0..6.0), rng.random_range(-0.5..1.0)]);
            if linalg::spectral_radius(&(m.a() - m.b() * &k)).unwrap() >= 0.999 {
                continue;
            }
            tried += 1;
            assert!(best <= closed_loop_cost(&m, &k, &cost, &x0) + 1e-9);
        }
    }

    #[test]
    fn observer_feedback_is_stable_for_shipped_design() {
        let m = StateSpaceModel::identified();
        let k = design_controller(&m, &CostPair::with_q11(40.0).unwrap()).unwrap().k;
        let kf = design_filter(&m, &CovariancePair::shipped()).unwrap().kf;
        let comp = observer_feedback_matrix(&m, &k, &kf).unwrap();
        assert_eq!(comp.shape(), (4, 4));
        assert!(linalg::spectral_radius(&comp).unwrap() < 1.0);
    }

    #[test]
    fn invalid_costs() {
        assert!(CostPair::new(DMatrix::identity(2, 2), DMatrix::zeros(1, 1)).is_err());
        assert!(CostPair::with_q11(-1.0).is_err());
    }
}
