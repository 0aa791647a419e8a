use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid of 1-based output-membership indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleTable {
    grid: Vec<Vec<usize>>,
}

impl RuleTable {
    pub fn new(grid: Vec<Vec<usize>>, n_outputs: usize) -> Result<Self> {
        let cols = grid.first().map_or(0, Vec::len);
        if grid.is_empty() || cols == 0 {
            return Err(Error::validation("rule grid is empty"));
        }
        for (i, row) in grid.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::validation(format!("[{i}]: has {} entries, expected {cols}", row.len())));
            }
            if let Some((j, &k)) = row.iter().enumerate().find(|(_, &k)| k == 0 || k > n_outputs) {
                return Err(Error::validation(format!(
                    "[{i}][{j}]: output index {k} outside 1..={n_outputs}"
                )));
            }
        }
        Ok(Self { grid })
    }

    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn cols(&self) -> usize {
        self.grid[0].len()
    }

    pub fn grid(&self) -> &[Vec<usize>] {
        &self.grid
    }

    /// Largest output index referenced.
    pub fn max_output(&self) -> usize {
        self.grid.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Max-min inference: `y[k] = max { min(deg1[i], deg2[j]) : grid[i][j] = k + 1 }`.
pub fn infer(rules: &RuleTable, deg1: &[f64], deg2: &[f64], n_outputs: usize) -> Result<Vec<f64>> {
    if deg1.len() != rules.rows() || deg2.len() != rules.cols() {
        return Err(Error::validation(format!(
            "rule grid is {}x{} but degree vectors have lengths {} and {}",
            rules.rows(),
            rules.cols(),
            deg1.len(),
            deg2.len()
        )));
    }
    if rules.max_output() > n_outputs {
        return Err(Error::validation(format!(
            "rules reference output {} but only {n_outputs} exist",
            rules.max_output()
        )));
    }
    let mut y = vec![0.0; n_outputs];
    for (i, row) in rules.grid.iter().enumerate() {
        for (j, &k) in row.iter().enumerate() {
            let w = deg1[i].min(deg2[j]);
            if w > y[k - 1] {
                y[k - 1] = w;
            }
        }
    }
    Ok(y)
}
