//! Small dense linear-algebra helpers shared across the design modules.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest eigenvalue magnitude.
///
/// 2×2 matrices use the characteristic polynomial directly
/// (λ² − tr·λ + det = 0); larger matrices go through a real Schur
/// decomposition.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::validation(format!(
            "spectral radius needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("spectral radius of a non-finite matrix"));
    }
    match m.nrows() {
        0 => Ok(0.0),
        1 => Ok(m[(0, 0)].abs()),
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = tr * tr - 4.0 * det;
            if disc < 0.0 {
                // complex pair: |λ|² = det
                Ok(det.sqrt())
            } else {
                let s = disc.sqrt();
                Ok(((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs()))
            }
        }
        _ => Ok(m
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)),
    }
}

/// Builds a matrix from row slices; every row must have the same length.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::validation(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol * m.amax().max(1.0)
}

/// Positive semidefiniteness via the symmetric eigenvalues.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical(format!("{what} is singular")))?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(format!("{what} is singular")));
    }
    Ok(inv)
}
