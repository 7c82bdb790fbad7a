use serde::{Deserialize, Serialize};

use super::{RadialGrid, PROFILE_NODES};
use crate::error::Result;
use crate::numerics::quadrature;
use crate::spaceform::SpaceForm;

/// Radial torsion function of a cap (−Δu = 1, u = 0 on the boundary) and tor(B_ρ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionSolution {
    pub space: SpaceForm,
    pub rho: f64,
    pub grid: RadialGrid,
    pub profile: Vec<f64>,
    pub tor_value: f64,
}

/// V(s)/sn(s)^{m−1} = −u'(s), finite at s = 0.
fn flux(space: SpaceForm, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    space.volume_profile(s) / space.sn(s).powi(space.dim as i32 - 1)
}

/// tor(B_ρ) = −½∫u = −½|S^{m−1}|∫₀^ρ V(s)²/sn(s)^{m−1} ds, after integrating by parts.
pub fn torsion_value(space: SpaceForm, rho: f64) -> Result<f64> {
    let rho = space.check_radius(rho)?;
    let i = quadrature::integrate(|s| space.volume_profile(s) * flux(space, s), 0.0, rho, 1e-15);
    Ok(-0.5 * space.unit_sphere_area() * i)
}

pub fn torsion_ball(space: SpaceForm, rho: f64) -> Result<TorsionSolution> {
    let rho = space.check_radius(rho)?;
    let grid = RadialGrid::uniform(rho, PROFILE_NODES)?;
    let n = grid.len();
    let mut profile = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let (a, b) = (grid.nodes[i], grid.nodes[i + 1]);
        profile[i] = profile[i + 1] + quadrature::integrate(|s| flux(space, s), a, b, 1e-16);
    }
    Ok(TorsionSolution { space, rho, grid, profile, tor_value: torsion_value(space, rho)? })
}
