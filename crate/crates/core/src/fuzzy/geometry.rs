//! Closed-form area and centroid of clipped memberships and of the
//! overlap between two neighbouring clipped memberships.

use super::membership::TrapezoidMF;

/// Area and x-centroid of a planar region. When `area == 0` the centroid
/// carries no information and is set to the middle of the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedShape {
    pub area: f64,
    pub centroid_x: f64,
}

impl ClippedShape {
    fn empty(at: f64) -> Self {
        Self { area: 0.0, centroid_x: at }
    }

    /// First moment about x = 0.
    pub fn moment(&self) -> f64 {
        if self.area > 0.0 {
            self.area * self.centroid_x
        } else {
            0.0
        }
    }
}

/// Trapezoid with base `[left, right]` on y = 0 and roof `[roof_left, roof_right]` at height `h`.
fn trapezoid(left: f64, right: f64, roof_left: f64, roof_right: f64, h: f64) -> ClippedShape {
    let base = (right - left).abs();
    let roof = (roof_right - roof_left).abs();
    let area = (base + roof) * h / 2.0;
    if base - roof <= 1e-12 * base.max(1.0) {
        // both legs vertical
        return ClippedShape { area, centroid_x: left + base / 2.0 };
    }
    let leg1_sq = (roof_left - left).powi(2) + h * h;
    let leg2_sq = (right - roof_right).powi(2) + h * h;
    let centroid_x =
        left + base / 2.0 + (2.0 * roof + base) * (leg1_sq - leg2_sq) / (6.0 * (base * base - roof * roof));
    ClippedShape { area, centroid_x }
}

/// Region under `min(μ(x), h)`.
pub fn clipped_shape(mf: &TrapezoidMF, h: f64) -> ClippedShape {
    let h = h.clamp(0.0, 1.0);
    let mid = 0.5 * (mf.b1 + mf.b2);
    if h == 0.0 || mf.b2 <= mf.b1 {
        return ClippedShape::empty(mid);
    }
    if h == 1.0 && mf.is_triangle() {
        return ClippedShape {
            area: (mf.b2 - mf.b1) / 2.0,
            centroid_x: (mf.b1 + mf.u1 + mf.b2) / 3.0,
        };
    }
    let x_inf1 = (mf.u1 - mf.b1) * h + mf.b1;
    let x_inf2 = (mf.u2 - mf.b2) * (h - 1.0) + mf.u2;
    trapezoid(mf.b1, mf.b2, x_inf1, x_inf2, h)
}

/// Region under `min(μ_j(x), h_j, μ_k(x), h_k)` for neighbours `j` before `k`.
///
/// Relies on the partition's ramp-to-ramp overlap rule: on the overlap the
/// left member is on its falling edge and the right member on its rising
/// edge, so the region is bounded by two lines meeting at a peak `G`.
pub fn intersection_shape(mf_j: &TrapezoidMF, mf_k: &TrapezoidMF, h_j: f64, h_k: f64) -> ClippedShape {
    let left = mf_k.b1;
    let right = mf_j.b2;
    let mid = 0.5 * (left + right);
    let y_roof = h_j.min(h_k).clamp(0.0, 1.0);
    if right <= left || y_roof == 0.0 {
        return ClippedShape::empty(mid);
    }
    // horizontal run of each edge per unit height; zero means vertical
    let rise = mf_k.u1 - mf_k.b1;
    let fall = mf_j.b2 - mf_j.u2;
    let run = rise + fall;
    // Edges meet at G: rising edge y = (x − left)/rise, falling y = (right − x)/fall.
    let peak_y = if run > 0.0 { (right - left) / run } else { f64::INFINITY };
    if y_roof >= peak_y {
        let peak_x = left + rise * peak_y;
        return ClippedShape {
            area: (right - left) * peak_y / 2.0,
            centroid_x: (left + peak_x + right) / 3.0,
        };
    }
    let x_inf1 = left + rise * y_roof;
    let x_inf2 = right - fall * y_roof;
    trapezoid(left, right, x_inf1, x_inf2, y_roof)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: f64, b: f64, c: f64) -> TrapezoidMF {
        TrapezoidMF::triangle(a, b, c).unwrap()
    }

    #[test]
    fn full_triangles() {
        let s = clipped_shape(&tri(0.0, 1.0, 2.0), 1.0);
        assert_eq!((s.area, s.centroid_x), (1.0, 1.0));
        let s = clipped_shape(&tri(1.68, 2.743, 3.806), 1.0);
        assert!((s.area - 1.063).abs() < 1e-12);
        assert!((s.centroid_x - 2.743).abs() < 1e-12);
    }

    #[test]
    fn zero_height_is_empty() {
        assert_eq!(clipped_shape(&tri(0.0, 1.0, 2.0), 0.0).area, 0.0);
        assert_eq!(intersection_shape(&tri(0.0, 1.0, 2.0), &tri(1.0, 2.0, 3.0), 1.0, 0.0).area, 0.0);
    }

    #[test]
    fn right_triangle_clipped() {
        // μ = 1 − x on [0, 1], clipped at 0.5: rectangle [0, .5]×.5 plus triangle
        let z = TrapezoidMF::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let s = clipped_shape(&z, 0.5);
        assert!((s.area - 0.375).abs() < 1e-15);
        let moment = 0.5 * 0.5 * 0.25 + 0.125 * (0.5 + 0.5 / 3.0);
        assert!((s.centroid_x - moment / 0.375).abs() < 1e-12);
    }

    #[test]
    fn symmetric_intersection_triangle() {
        let s = intersection_shape(&tri(0.0, 1.0, 2.0), &tri(1.0, 2.0, 3.0), 1.0, 1.0);
        assert!((s.area - 0.25).abs() < 1e-15);
        assert!((s.centroid_x - 1.5).abs() < 1e-15);
    }

    #[test]
    fn disjoint_and_touching_members() {
        assert_eq!(intersection_shape(&tri(0.0, 1.0, 2.0), &tri(2.0, 3.0, 4.0), 1.0, 1.0).area, 0.0);
        assert_eq!(intersection_shape(&tri(0.0, 1.0, 2.0), &tri(5.0, 6.0, 7.0), 1.0, 1.0).area, 0.0);
    }

    #[test]
    fn vertical_edges_form_rectangle() {
        let a = TrapezoidMF::new(0.0, 0.0, 2.0, 2.0).unwrap();
        let b = TrapezoidMF::new(1.0, 1.0, 3.0, 3.0).unwrap();
        let s = intersection_shape(&a, &b, 0.4, 0.8);
        assert!((s.area - 0.4).abs() < 1e-15);
        assert!((s.centroid_x - 1.5).abs() < 1e-15);
    }

    #[test]
    fn area_grows_with_height() {
        let m = TrapezoidMF::new(0.0, 1.0, 3.0, 4.0).unwrap();
        let mut last = 0.0;
        for i in 0..=100 {
            let a = clipped_shape(&m, i as f64 / 100.0).area;
            assert!(a >= last);
            last = a;
        }
    }
}
