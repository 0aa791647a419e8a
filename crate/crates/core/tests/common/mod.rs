//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pitchstab::fuzzy::{MFPartition, TrapezoidMF};
use pitchstab::harness::{Outcome, SimTrace, TraceRecord};
use rand::Rng;

/// Trapezoid degree, written out independently of the library.
pub fn trapezoid(c: [f64; 4], x: f64) -> f64 {
    let [b1, u1, u2, b2] = c;
    if x < b1 || x > b2 {
        0.0
    } else if x < u1 {
        (x - b1) / (u1 - b1)
    } else if x <= u2 {
        1.0
    } else {
        (b2 - x) / (b2 - u2)
    }
}

/// Area and centroid of `x ↦ f(x)` on `[lo, hi]`, midpoint rule with step `h`.
pub fn integrate(lo: f64, hi: f64, h: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = ((hi - lo) / h).ceil() as usize;
    let step = (hi - lo) / n as f64;
    let (mut area, mut moment) = (0.0, 0.0);
    for i in 0..n {
        let x = lo + (i as f64 + 0.5) * step;
        let v = f(x);
        area += v * step;
        moment += x * v * step;
    }
    (area, if area > 0.0 { moment / area } else { f64::NAN })
}

/// Centroid of the union of clipped memberships on a uniform grid.
pub fn union_centroid(corners: &[[f64; 4]], heights: &[f64], h: f64) -> (f64, f64) {
    let lo = corners.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
    let hi = corners.iter().map(|c| c[3]).fold(f64::NEG_INFINITY, f64::max);
    integrate(lo, hi, h, |x| {
        corners
            .iter()
            .zip(heights)
            .map(|(&c, &hh)| trapezoid(c, x).min(hh))
            .fold(0.0, f64::max)
    })
}

/// Random partition obeying the neighbour-only, ramp-to-ramp overlap rules.
/// Ramps and cores are sometimes zero-width to exercise vertical edges.
pub fn random_partition<R: Rng>(rng: &mut R) -> Vec<[f64; 4]> {
    let n = rng.random_range(1..=5);
    let width = |rng: &mut R| if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.05..2.0) };
    let mut out: Vec<[f64; 4]> = Vec::with_capacity(n);
    let mut b1 = rng.random_range(-5.0..5.0);
    for i in 0..n {
        if i > 0 {
            let prev = out[i - 1];
            let floor = if i >= 2 { prev[1].max(out[i - 2][3]) } else { prev[1] };
            // overlap the previous member, or leave a gap
            let ceil = prev[3] + if rng.random_bool(0.2) { 1.0 } else { 0.0 };
            b1 = if ceil > floor { rng.random_range(floor..=ceil) } else { floor };
        }
        let u1 = b1 + width(rng);
        let min_u2 = if i > 0 { u1.max(out[i - 1][3]) } else { u1 };
        let u2 = min_u2 + width(rng);
        let mut b2 = u2 + width(rng);
        if b2 - b1 < 0.05 {
            b2 = b1 + 0.05;
        }
        out.push([b1, u1, u2, b2]);
    }
    out
}

pub fn partition_of(corners: &[[f64; 4]]) -> MFPartition {
    let mfs = corners.iter().map(|&c| TrapezoidMF::try_from(c).unwrap()).collect();
    MFPartition::new("random", "", mfs).unwrap()
}

/// Clip heights with at least one clearly positive entry.
pub fn random_heights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut h: Vec<f64> = (0..n)
        .map(|_| match rng.random_range(0..5) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..1.0),
        })
        .collect();
    let k = rng.random_range(0..n);
    h[k] = h[k].max(0.2);
    h
}

/// `Aᵀ P A − P − Aᵀ P B (Bᵀ P B + R)⁻¹ Bᵀ P A + Q`, Frobenius norm.
pub fn control_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let g = (b.transpose() * p * b + r).try_inverse().unwrap();
    let res = a.transpose() * p * a - p - a.transpose() * p * b * g * b.transpose() * p * a + q;
    res.norm()
}

/// `A P Aᵀ − P + Vd − A P Cᵀ (Vn + C P Cᵀ)⁻¹ C P Aᵀ`, Frobenius norm.
pub fn filter_residual(a: &DMatrix<f64>, c: &DMatrix<f64>, vd: &DMatrix<f64>, vn: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let s = (vn + c * p * c.transpose()).try_inverse().unwrap();
    let res = a * p * a.transpose() - p + vd - a * p * c.transpose() * s * c * p * a.transpose();
    res.norm()
}

fn radius2(a: &DMatrix<f64>) -> f64 {
    let tr = a.trace();
    let det = a.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        det.sqrt()
    } else {
        ((tr + disc.sqrt()) / 2.0).abs().max(((tr - disc.sqrt()) / 2.0).abs())
    }
}

/// Random 2×2 matrix scaled to a spectral radius drawn from `[lo, hi]`.
pub fn random_dynamics<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
        let r = radius2(&a);
        if r > 1e-3 {
            return a * (rng.random_range(lo..hi) / r);
        }
    }
}

/// Random controllable single-input pair `(A, B)`, open loop possibly unstable.
pub fn random_stabilizable<R: Rng>(rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>) {
    loop {
        let a = random_dynamics(rng, 0.3, 1.3);
        let b = DMatrix::from_fn(2, 1, |_, _| rng.random_range(-1.0..1.0));
        let ab = &a * &b;
        let det = b[0] * ab[1] - b[1] * ab[0];
        if det.abs() >= 0.1 {
            return (a, b);
        }
    }
}

pub fn prbs<R: Rng>(rng: &mut R, len: usize) -> Vec<DVector<f64>> {
    (0..len)
        .map(|_| DVector::from_element(1, if rng.random_bool(0.5) { 1.0 } else { -1.0 }))
        .collect()
}

/// Synthetic θ trace embedding the landmarks of a recorded push recovery:
/// standing at 3.416°, knocked to −22.21° at t = 0.696 s, through the 10%
/// level at 0.72 s and the 90% level at 1.872 s, peaking at 3.046°, settled
/// inside the 2% band from 3.168 s, final value 2.391°.
pub fn landmark_trace() -> SimTrace {
    let dt = 0.024;
    let n = 400;
    let lerp = |i: usize, i0: usize, y0: f64, i1: usize, y1: f64| y0 + (y1 - y0) * (i - i0) as f64 / (i1 - i0) as f64;
    let level10 = -22.21 + 0.1 * (2.391 + 22.21);
    let level90 = -22.21 + 0.9 * (2.391 + 22.21);
    let y: Vec<f64> = (0..n)
        .map(|i| match i {
            0..=28 => 3.416,
            29 => -22.21,
            30..=78 => lerp(i, 30, level10, 78, level90),
            79..=100 => lerp(i, 78, level90, 100, 3.046),
            101..=131 => lerp(i, 100, 3.046, 131, 2.9),
            132 => 2.8,
            133..=140 => lerp(i, 132, 2.8, 140, 2.391),
            _ => 2.391,
        })
        .collect();
    let records = y
        .iter()
        .enumerate()
        .map(|(i, &th)| TraceRecord {
            t: i as f64 * dt,
            theta_true: th,
            theta_dot_true: 0.0,
            theta_meas: th,
            theta_dot_meas: 0.0,
            theta_hat: th,
            theta_dot_hat: 0.0,
            u: 0.0,
            k_theta: 0.0,
            k_theta_dot: 0.0,
            x_cp: 0.0,
            step_active: false,
            disturbance: i == 29,
        })
        .collect();
    SimTrace { dt, records, outcome: Outcome::Stood }
}

pub fn workspace_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}
