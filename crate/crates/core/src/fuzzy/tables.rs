//! The tuned membership partitions and rule tables used on the robot.
//!
//! Gains are the LQR designs for `q11 = 40` (medium) and `q11 = 75` (high);
//! the zero membership is literally zero, not a design for `q11 = 0`.

use super::membership::{MFPartition, TrapezoidMF};
use super::rules::RuleTable;

fn mf(c: [f64; 4]) -> TrapezoidMF {
    TrapezoidMF::try_from(c).expect("shipped corners are ordered")
}

fn partition(name: &str, units: &str, corners: &[[f64; 4]]) -> MFPartition {
    MFPartition::new(name, units, corners.iter().copied().map(mf).collect()).expect("shipped partition is valid")
}

/// CoM pitch angle in degrees: NH, N, P, PH.
pub fn angle() -> MFPartition {
    partition(
        "angle_mfs",
        "deg",
        &[
            [-90.0, -45.0, -21.0, -11.0],
            [-21.0, -11.0, 0.0, 3.0],
            [0.0, 3.0, 7.0, 10.0],
            [7.0, 10.0, 45.0, 90.0],
        ],
    )
}

/// CoM pitch rate in rad/s: N, A, P.
pub fn velocity() -> MFPartition {
    partition(
        "velocity_mfs",
        "rad/s",
        &[[-7.0, -3.0, -0.7, -0.5], [-0.7, -0.5, 0.5, 0.7], [0.5, 0.7, 3.0, 7.0]],
    )
}

/// Angle gain: Z, M, H.
pub fn angle_gain() -> MFPartition {
    partition(
        "angle_gain_mfs",
        "deg/deg",
        &[
            [0.0, 0.0, 0.0, 1.68],
            [1.68, 2.743, 2.743, 3.806],
            [2.743, 3.806, 3.806, 4.869],
        ],
    )
}

/// Rate gain: Z, M, H.
pub fn velocity_gain() -> MFPartition {
    partition(
        "velocity_gain_mfs",
        "deg/(rad/s)",
        &[
            [0.0, 0.0, 0.0, 0.486],
            [0.486, 0.506, 0.506, 0.526],
            [0.506, 0.526, 0.526, 0.546],
        ],
    )
}

/// Rows follow the angle memberships, columns the rate memberships.
pub fn angle_gain_rules() -> RuleTable {
    RuleTable::new(vec![vec![3, 3, 3], vec![2, 2, 2], vec![1, 1, 1], vec![3, 3, 3]], 3)
        .expect("shipped rules are valid")
}

pub fn velocity_gain_rules() -> RuleTable {
    RuleTable::new(vec![vec![3, 3, 3], vec![2, 2, 2], vec![1, 1, 1], vec![2, 2, 2]], 3)
        .expect("shipped rules are valid")
}
