mod common;

use nalgebra::{DMatrix, DVector};
use pitchstab::kalman::{design_filter, filter_step, solve_filter_riccati, CovariancePair};
use pitchstab::linalg::spectral_radius;
use pitchstab::lqr::{control_law, design_controller, quadratic_cost, solve_control_riccati, CostPair};
use pitchstab::statespace::{step, StateSpaceModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(rng: &mut ChaCha8Rng) -> StateSpaceModel {
    let (a, b) = common::random_stabilizable(rng);
    StateSpaceModel::new(a, b, DMatrix::identity(2, 2), 41.664).unwrap()
}

#[test]
fn filter_error_decays_without_noise() {
    let model = StateSpaceModel::identified();
    let design = design_filter(&model, &CovariancePair::shipped()).unwrap();
    let mut x = DVector::from_column_slice(&[5.0, -1.0]);
    let mut x_hat = DVector::zeros(2);
    for k in 0..200 {
        let u = DVector::from_element(1, (k as f64 * 0.3).sin());
        let y = model.c() * &x;
        x_hat = filter_step(&design, &model, &x_hat, &u, &y).unwrap();
        x = step(&model, &x, &u).unwrap();
    }
    assert!((x - x_hat).norm() < 1e-3);
}

#[test]
fn noisier_rate_channel_lowers_its_gain() {
    let model = StateSpaceModel::identified();
    let mut last = f64::INFINITY;
    for vn22 in [0.1, 1.0, 35.0, 1000.0] {
        let kf = design_filter(&model, &CovariancePair::with_vn22(vn22).unwrap()).unwrap().kf;
        let weight = kf.column(1).norm();
        assert!(weight < last, "vn22={vn22}");
        last = weight;
    }
}

#[test]
fn heavier_angle_weight_stiffens_the_angle_gain() {
    let model = StateSpaceModel::identified();
    let mut last = 0.0;
    for q11 in [10.0, 30.0, 40.0, 75.0, 200.0] {
        let k = design_controller(&model, &CostPair::with_q11(q11).unwrap()).unwrap().k;
        assert!(k[(0, 0)] > last);
        last = k[(0, 0)];
    }
}

#[test]
fn unstabilizable_pair_is_a_numerical_error() {
    let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let model = StateSpaceModel::new(a, b, DMatrix::identity(2, 2), 10.0).unwrap();
    let err = solve_control_riccati(&model, &CostPair::with_q11(1.0).unwrap()).unwrap_err();
    assert!(err.is_numerical());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn riccati_solutions_satisfy_their_equations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let r = rng.random_range(0.05..20.0);
        let cost = CostPair::new(DMatrix::identity(2, 2), DMatrix::from_element(1, 1, r)).unwrap();
        let p = solve_control_riccati(&model, &cost).unwrap();
        prop_assert!(common::control_residual(model.a(), model.b(), cost.q(), cost.r(), &p) < 1e-9);
        prop_assert!(pitchstab::linalg::min_symmetric_eigenvalue(&p) > 0.0);

        let cov = CovariancePair::with_vn22(rng.random_range(0.01..100.0)).unwrap();
        let p = solve_filter_riccati(&model, &cov).unwrap();
        prop_assert!(common::filter_residual(model.a(), model.c(), cov.vd(), cov.vn(), &p) < 1e-9);
    }

    #[test]
    fn designs_are_stable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let c = design_controller(&model, &CostPair::with_q11(rng.random_range(0.1..100.0)).unwrap()).unwrap();
        prop_assert!(c.closed_loop_radius < 1.0);
        prop_assert!((spectral_radius(&(model.a() - model.b() * &c.k)).unwrap() - c.closed_loop_radius).abs() < 1e-12);
        let f = design_filter(&model, &CovariancePair::shipped()).unwrap();
        prop_assert!(f.closed_loop_radius < 1.0);
    }

    #[test]
    fn optimal_gain_beats_perturbed_gains(seed in any::<u64>(), dk0 in -0.5..0.5f64, dk1 in -0.2..0.2f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = StateSpaceModel::identified();
        let cost = CostPair::with_q11(40.0).unwrap();
        let k = design_controller(&model, &cost).unwrap().k;
        let perturbed = &k + DMatrix::from_row_slice(1, 2, &[dk0, dk1]);
        prop_assume!(spectral_radius(&(model.a() - model.b() * &perturbed)).unwrap() < 0.999);
        let x0 = DVector::from_column_slice(&[rng.random_range(-20.0..20.0), rng.random_range(-2.0..2.0)]);
        let run = |gain: &DMatrix<f64>| {
            let (mut xs, mut us) = (vec![x0.clone()], Vec::new());
            for _ in 0..3000 {
                let u = control_law(gain, xs.last().unwrap(), f64::INFINITY);
                xs.push(step(&model, xs.last().unwrap(), &u).unwrap());
                us.push(u);
            }
            xs.pop();
            quadratic_cost(&xs, &us, &cost).unwrap()
        };
        prop_assert!(run(&k) <= run(&perturbed) * (1.0 + 1e-9));
    }
}
