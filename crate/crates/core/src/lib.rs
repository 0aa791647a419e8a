//! Pitch-axis balance control for position-controlled humanoid robots.
//!
//! The pipeline runs from identification of a discrete linear model
//! ([`sysid`]) through steady-state Kalman filtering ([`kalman`]) and LQR
//! design ([`lqr`]) to fuzzy gain scheduling ([`fuzzy`]) and capture-point
//! stepping ([`capture`]). A simulated plant ([`plant`]) and closed-loop
//! runner ([`harness`]) stand in for the hardware.
//!
//! Units: θ in degrees, θ̇ in rad/s, ankle commands in degrees.

pub mod capture;
pub mod error;
pub mod fuzzy;
pub mod harness;
pub mod kalman;
pub mod linalg;
pub mod lqr;
pub mod plant;
mod riccati;
pub mod statespace;
pub mod sysid;

pub use error::{Error, Result};
