//! Fuzzy gain scheduling: trapezoidal memberships, max-min inference and
//! exact centroid-of-union defuzzification.

mod defuzz;
mod geometry;
mod membership;
mod rules;
mod scheduler;
pub mod tables;

pub use defuzz::{defuzzify, MIN_AREA};
pub use geometry::{clipped_shape, intersection_shape, ClippedShape};
pub use membership::{fuzzify, mf_eval, MFPartition, TrapezoidMF};
pub use rules::{infer, RuleTable};
pub use scheduler::{FuzzyConfig, GainScheduler, RowInput, INITIAL_GAINS};
