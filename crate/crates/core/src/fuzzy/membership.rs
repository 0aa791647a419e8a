use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trapezoid with feet `b1`, `b2` and core `[u1, u2]`; a triangle when `u1 == u2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct TrapezoidMF {
    pub(crate) b1: f64,
    pub(crate) u1: f64,
    pub(crate) u2: f64,
    pub(crate) b2: f64,
}

impl TryFrom<[f64; 4]> for TrapezoidMF {
    type Error = Error;

    fn try_from(c: [f64; 4]) -> Result<Self> {
        TrapezoidMF::new(c[0], c[1], c[2], c[3])
    }
}

impl From<TrapezoidMF> for [f64; 4] {
    fn from(m: TrapezoidMF) -> Self {
        [m.b1, m.u1, m.u2, m.b2]
    }
}

impl TrapezoidMF {
    pub fn new(b1: f64, u1: f64, u2: f64, b2: f64) -> Result<Self> {
        if ![b1, u1, u2, b2].iter().all(|v| v.is_finite()) {
            return Err(Error::validation("corner is not finite"));
        }
        for (lo, hi, msg) in [(b1, u1, "b1 > u1"), (u1, u2, "u1 > u2"), (u2, b2, "u2 > b2")] {
            if lo > hi {
                return Err(Error::validation(msg));
            }
        }
        Ok(Self { b1, u1, u2, b2 })
    }

    pub fn triangle(b1: f64, peak: f64, b2: f64) -> Result<Self> {
        Self::new(b1, peak, peak, b2)
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.b1, self.u1, self.u2, self.b2]
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u2(&self) -> f64 {
        self.u2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn is_triangle(&self) -> bool {
        self.u1 == self.u2
    }
}

/// Membership degree of `x`. A zero-width ramp belongs to the core.
pub fn mf_eval(mf: &TrapezoidMF, x: f64) -> f64 {
    if x < mf.b1 || x > mf.b2 {
        0.0
    } else if x >= mf.u1 && x <= mf.u2 {
        1.0
    } else if x < mf.u1 {
        (x - mf.b1) / (mf.u1 - mf.b1)
    } else {
        (mf.b2 - x) / (mf.b2 - mf.u2)
    }
}

/// Ordered set of memberships over one variable.
///
/// Besides ordering, only neighbours may overlap, and each neighbour pair
/// overlaps ramp-to-ramp: the left member's rising edge ends before the
/// right member starts, and the right member's falling edge starts after
/// the left member ends. Under these rules the union of clipped memberships
/// is exactly the individual areas minus the pairwise intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct MFPartition {
    name: String,
    units: String,
    mfs: Vec<TrapezoidMF>,
}

impl MFPartition {
    pub fn new(name: impl Into<String>, units: impl Into<String>, mfs: Vec<TrapezoidMF>) -> Result<Self> {
        let name = name.into();
        if mfs.is_empty() {
            return Err(Error::validation(format!("{name}: partition is empty")));
        }
        for (i, w) in mfs.windows(2).enumerate() {
            let (l, r) = (&w[0], &w[1]);
            let j = i + 1;
            if r.b1 < l.b1 {
                return Err(Error::validation(format!("{name}[{j}]: b1 below previous member's b1")));
            }
            if l.b2 > r.b1 {
                if l.u1 > r.b1 {
                    return Err(Error::validation(format!(
                        "{name}[{j}]: overlaps previous member's rising edge (b1 < previous u1)"
                    )));
                }
                if l.b2 > r.u2 {
                    return Err(Error::validation(format!(
                        "{name}[{j}]: previous member extends past this member's core (previous b2 > u2)"
                    )));
                }
            }
        }
        for i in 0..mfs.len().saturating_sub(2) {
            if mfs[i].b2 > mfs[i + 2].b1 {
                return Err(Error::validation(format!(
                    "{name}[{i}]: overlaps non-adjacent member {} (b2 > b1)",
                    i + 2
                )));
            }
        }
        Ok(Self { name, units: units.into(), mfs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn mfs(&self) -> &[TrapezoidMF] {
        &self.mfs
    }

    pub fn len(&self) -> usize {
        self.mfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mfs.is_empty()
    }

    /// `[min b1, max b2]`.
    pub fn hull(&self) -> (f64, f64) {
        let lo = self.mfs.iter().map(|m| m.b1).fold(f64::INFINITY, f64::min);
        let hi = self.mfs.iter().map(|m| m.b2).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Degree of every membership at `x`.
///
/// `x` is clamped to the hull and the outermost members act as shoulders
/// (full membership beyond their core), so at least one degree is positive
/// for any finite input.
pub fn fuzzify(partition: &MFPartition, x: f64) -> Vec<f64> {
    let (lo, hi) = partition.hull();
    let x = if x.is_nan() { 0.5 * (lo + hi) } else { x.clamp(lo, hi) };
    let last = partition.mfs.len() - 1;
    partition
        .mfs
        .iter()
        .enumerate()
        .map(|(i, mf)| {
            if (i == 0 && x <= mf.u1) || (i == last && x >= mf.u2) {
                1.0
            } else {
                mf_eval(mf, x)
            }
        })
        .collect()
}
