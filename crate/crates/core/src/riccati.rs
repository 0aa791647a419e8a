//! Fixed-point solver shared by the filter and control Riccati equations.
//!
//! Both designs reduce to `P = AᵀPA − AᵀPB(BᵀPB + R)⁻¹BᵀPA + Q`; the filter
//! form is the same equation with `(Aᵀ, Cᵀ, Vd, Vn)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{inverse, symmetrize};

pub const MAX_ITERATIONS: usize = 10_000;

/// Step-size tolerance, relative to `max(1, ‖P‖_F)`.
pub const STEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub p: DMatrix<f64>,
    pub iterations: usize,
}

fn rhs(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let at = a.transpose();
    let bt = b.transpose();
    let s = &bt * p * b + r;
    let s_inv = inverse(&s, "BᵀPB + R")?;
    let pa = p * a;
    let next = &at * &pa - &at * p * b * s_inv * &bt * &pa + q;
    Ok(symmetrize(&next))
}

/// Iterates `P ← RHS(P)` from `p0` until successive iterates agree.
pub(crate) fn solve(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p0: &DMatrix<f64>,
) -> Result<Solution> {
    let mut p = p0.clone();
    for it in 1..=MAX_ITERATIONS {
        let next = rhs(a, b, q, r, &p)?;
        if next.iter().any(|v| !v.is_finite()) || !next.norm().is_finite() {
            return Err(Error::numerical(format!(
                "Riccati non-convergence: iterate became non-finite after {it} iterations"
            )));
        }
        let step = (&next - &p).norm();
        p = next;
        if step < STEP_TOL * p.norm().max(1.0) {
            return Ok(Solution { p, iterations: it });
        }
    }
    Err(Error::numerical(format!(
        "Riccati non-convergence: no fixed point within {MAX_ITERATIONS} iterations"
    )))
}

/// Frobenius norm of `RHS(P) − P`.
pub(crate) fn residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<f64> {
    Ok((rhs(a, b, q, r, p)? - p).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_matches_closed_form() {
        // p = a²p − a²p²b²/(b²p + r) + q with a = 0.5, b = q = r = 1
        // ⇒ p² − 0.25p − 1 = 0 after clearing the denominator.
        let m = |v: f64| DMatrix::from_element(1, 1, v);
        let s = solve(&m(0.5), &m(1.0), &m(1.0), &m(1.0), &m(1.0)).unwrap();
        let exact = (0.25 + (0.0625f64 + 4.0).sqrt()) / 2.0;
        assert!((s.p[(0, 0)] - exact).abs() < 1e-12);
    }

    #[test]
    fn unstabilizable_system_does_not_converge() {
        let m = |v: f64| DMatrix::from_element(1, 1, v);
        let err = solve(&m(1.5), &m(0.0), &m(1.0), &m(1.0), &m(1.0)).unwrap_err();
        assert!(err.to_string().contains("non-convergence"), "{err}");
    }
}
