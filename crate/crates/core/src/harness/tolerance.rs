use rayon::prelude::*;
use serde::Serialize;

use super::run::{run_scenario, Outcome};
use super::scenario::{ScenarioConfig, ToleranceConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ToleranceOutcome {
    /// The range bottom already fails the pass criterion.
    BottomFails { magnitude: f64 },
    /// Largest passing magnitude found, within the search resolution.
    Tolerated { magnitude: f64, bisection_steps: usize },
}

impl ToleranceOutcome {
    /// Tolerated magnitude, counting a failing bottom as zero tolerance.
    pub fn tolerated(&self) -> f64 {
        match *self {
            ToleranceOutcome::BottomFails { .. } => 0.0,
            ToleranceOutcome::Tolerated { magnitude, .. } => magnitude,
        }
    }
}

/// Share of `trials` seeded runs (seeds `seed`, `seed + 1`, …) that stand
/// with every disturbance set to `magnitude`.
pub fn pass_rate(template: &ScenarioConfig, magnitude: f64, trials: usize) -> Result<f64> {
    let cfg = template.with_disturbance_magnitude(magnitude);
    let stood = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(i);
            run_scenario(&c).map(|tr| tr.outcome == Outcome::Stood)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(stood.iter().filter(|&&s| s).count() as f64 / trials as f64)
}

/// Bisects for the largest disturbance magnitude the scenario survives.
/// Assumes larger magnitudes are never easier.
pub fn tolerance_search(template: &ScenarioConfig, search: &ToleranceConfig) -> Result<ToleranceOutcome> {
    search.validate()?;
    if template.disturbances.is_empty() {
        return Err(Error::validation("tolerance search needs at least one disturbance event"));
    }
    let passes = |m: f64| -> Result<bool> { Ok(pass_rate(template, m, search.trials)? >= search.pass_fraction) };

    if !passes(search.min)? {
        return Ok(ToleranceOutcome::BottomFails { magnitude: search.min });
    }
    if passes(search.max)? {
        return Ok(ToleranceOutcome::Tolerated { magnitude: search.max, bisection_steps: 0 });
    }
    let (mut lo, mut hi) = (search.min, search.max);
    let mut steps = 0;
    while hi - lo > search.resolution {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(ToleranceOutcome::Tolerated { magnitude: lo, bisection_steps: steps })
}
