use super::geometry::{clipped_shape, intersection_shape};
use super::membership::MFPartition;

/// Below this total area the union is treated as empty.
pub const MIN_AREA: f64 = 1e-12;

/// Centroid of the union of memberships clipped at `y_inf`.
///
/// Inclusion–exclusion: every clipped member counts once and every
/// neighbouring overlap is removed once. Returns `fallback` when the union
/// has no area (or `y_inf` has the wrong length).
pub fn defuzzify(partition: &MFPartition, y_inf: &[f64], fallback: f64) -> f64 {
    let mfs = partition.mfs();
    if y_inf.len() != mfs.len() {
        return fallback;
    }
    let mut area = 0.0;
    let mut moment = 0.0;
    for (mf, &h) in mfs.iter().zip(y_inf) {
        let s = clipped_shape(mf, h);
        area += s.area;
        moment += s.moment();
    }
    for j in 0..mfs.len().saturating_sub(1) {
        let s = intersection_shape(&mfs[j], &mfs[j + 1], y_inf[j], y_inf[j + 1]);
        area -= s.area;
        moment -= s.moment();
    }
    if area <= MIN_AREA {
        return fallback;
    }
    moment / area
}
