use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    Uniform,
}

/// Increasing nodes φ_0 < … < φ_N = ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub spacing: Spacing,
}

impl RadialGrid {
    /// `n` uniform nodes on [0, ρ].
    pub fn uniform(rho: f64, n: usize) -> Result<Self> {
        if n < 2 || !(rho > 0.0) {
            return domain("a radial grid needs at least two nodes and ρ > 0");
        }
        let nodes = (0..n).map(|i| rho * i as f64 / (n - 1) as f64).collect();
        Ok(Self { nodes, spacing: Spacing::Uniform })
    }

    pub fn rho(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
