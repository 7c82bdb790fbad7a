use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{first_eigenvalue, torsion_value};
use crate::error::{domain, Result};
use crate::spaceform::SpaceForm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KjRow {
    pub r: f64,
    pub lambda: f64,
    pub tor: f64,
    /// f_R(r) = λ₁(B_r) − λ₁(B_R)
    pub f: f64,
    /// g_R(r) = tor(B_r) − tor(B_R)
    pub g: f64,
}

/// Eigenvalue and torsion deficit curves against a reference ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KjTable {
    pub space: SpaceForm,
    pub big_r: f64,
    pub rows: Vec<KjRow>,
    /// max g/f over the grid without the r = R endpoint
    pub c_est: f64,
    pub f_decreasing: bool,
    pub g_decreasing: bool,
}

pub fn kj_deficit_curves(space: SpaceForm, big_r: f64, r_grid: &[f64]) -> Result<KjTable> {
    let big_r = space.check_radius(big_r)?;
    if r_grid.iter().any(|&r| !(r > 0.0 && r <= big_r)) {
        return domain("every grid radius must lie in (0, R]");
    }
    let mut grid = r_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let lam_r = first_eigenvalue(space, big_r)?;
    let tor_r = torsion_value(space, big_r)?;
    let rows = grid
        .par_iter()
        .map(|&r| {
            let (lambda, tor) = if r == big_r { (lam_r, tor_r) } else { (first_eigenvalue(space, r)?, torsion_value(space, r)?) };
            Ok(KjRow { r, lambda, tor, f: lambda - lam_r, g: tor - tor_r })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_est = rows.iter().filter(|row| row.r < big_r).map(|row| row.g / row.f).fold(f64::NEG_INFINITY, f64::max);
    let f_decreasing = rows.windows(2).all(|w| w[1].f < w[0].f);
    let g_decreasing = rows.windows(2).all(|w| w[1].g < w[0].g);
    Ok(KjTable { space, big_r, rows, c_est, f_decreasing, g_decreasing })
}
