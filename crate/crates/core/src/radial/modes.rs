use serde::{Deserialize, Serialize};

use super::{cap_first_eigenvalue, RadialGrid, PROFILE_NODES};
use crate::error::{domain, Result, SpecError};
use crate::numerics::interp::Hermite;
use crate::numerics::ode::{self, OdeTol};
use crate::spaceform::SpaceForm;

/// Start of the integration away from the regular singular point φ = 0.
pub const START_EPS: f64 = 1e-6;

/// Positive root of α² + (n−2)α − μ = 0.
pub fn indicial_exponent(n: usize, mu: f64) -> f64 {
    let b = n as f64 - 2.0;
    0.5 * (-b + (b * b + 4.0 * mu).sqrt())
}

/// Solution of g'' + (n−1)(sn'/sn) g' + (λ − μ/sn²) g = 0 that is regular at 0,
/// sampled on a uniform grid together with g'.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub space: SpaceForm,
    pub rho: f64,
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl ModeProfile {
    pub fn boundary_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn boundary_slope(&self) -> f64 {
        *self.slopes.last().unwrap()
    }

    pub fn interpolant(&self) -> Hermite {
        Hermite::new(self.grid.nodes.clone(), self.values.clone(), self.slopes.clone())
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
        self.slopes.iter_mut().for_each(|v| *v *= c);
    }
}

type State = [f64; 2];

fn rhs(space: SpaceForm, mu: f64, lambda: f64) -> impl FnMut(f64, &State) -> State {
    let m1 = space.dim as f64 - 1.0;
    move |phi, y| {
        let s = space.sn(phi);
        [y[1], -m1 * space.ct(phi) * y[1] - (lambda - mu / (s * s)) * y[0]]
    }
}

/// Start values of g/ε^α at φ = ε from the two-term indicial expansion.
fn start(space: SpaceForm, mu: f64, lambda: f64) -> (f64, State) {
    let n = space.dim as f64;
    let alpha = indicial_exponent(space.dim, mu);
    let kappa = space.curvature();
    let c2 = (kappa * (n - 1.0) * alpha / 3.0 + kappa * mu / 3.0 - lambda) / (4.0 * alpha + 2.0 * n);
    let e = START_EPS;
    (alpha, [1.0 + c2 * e * e, alpha / e + (alpha + 2.0) * c2 * e])
}

/// Value and slope at ρ of the regular solution, rescaled by (ε/ρ)^α so that the
/// result is O(1) for moderate λ.
pub(crate) fn shoot(space: SpaceForm, rho: f64, mu: f64, lambda: f64) -> Result<State> {
    let (alpha, y0) = start(space, mu, lambda);
    let mut f = rhs(space, mu, lambda);
    let y = ode::integrate(&mut f, START_EPS, y0, rho, OdeTol::default())?;
    let s = (START_EPS / rho).powf(alpha);
    Ok([y[0] * s, y[1] * s])
}

/// Regular solution sampled on `n_nodes` uniform nodes of [0, ρ], normalized so that
/// its largest absolute value is 1.
pub fn radial_mode(space: SpaceForm, rho: f64, mu: f64, lambda: f64, n_nodes: usize) -> Result<ModeProfile> {
    if mu < 0.0 {
        return domain("angular eigenvalue μ must be nonnegative");
    }
    let grid = RadialGrid::uniform(rho, n_nodes)?;
    let (alpha, y0) = start(space, mu, lambda);
    let mut f = rhs(space, mu, lambda);
    let states = ode::integrate_nodes(&mut f, START_EPS, y0, &grid.nodes[1..], OdeTol::default())?;
    let (v0, d0) = if alpha == 0.0 {
        (1.0, 0.0)
    } else if (alpha - 1.0).abs() < 1e-12 {
        (0.0, 1.0 / START_EPS)
    } else {
        (0.0, 0.0)
    };
    let mut values = vec![v0];
    let mut slopes = vec![d0];
    for s in states {
        values.push(s[0]);
        slopes.push(s[1]);
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(scale.is_finite() && scale > 0.0) {
        return Err(SpecError::Numerical("radial mode has no finite scale".into()));
    }
    let mut p = ModeProfile { space, rho, mu, lambda, alpha, grid, values, slopes };
    p.scale(1.0 / scale);
    Ok(p)
}

/// The angular-mode profile g with g(0) = 0, normalized by g(ρ) = |u'_ρ|, where
/// u_ρ is the normalized first eigenfunction of the cap.
pub fn angular_radial_solution(space: SpaceForm, rho: f64, mu: f64, lambda: f64) -> Result<ModeProfile> {
    if !(mu > 0.0) {
        return domain("μ = 0 is the excluded constant mode");
    }
    let rho = space.check_radius(rho)?;
    let target = cap_first_eigenvalue(space, rho)?.boundary_slope.abs();
    profile_with_boundary_value(space, rho, mu, lambda, target)
}

pub(crate) fn profile_with_boundary_value(space: SpaceForm, rho: f64, mu: f64, lambda: f64, target: f64) -> Result<ModeProfile> {
    let mut p = radial_mode(space, rho, mu, lambda, PROFILE_NODES)?;
    let n = p.values.len();
    if let Some(i) = (1..n - 1).find(|&i| p.values[i] <= 0.0) {
        return Err(SpecError::Invariant(format!("mode profile (μ={mu}) vanishes at φ = {} inside (0, ρ)", p.grid.nodes[i])));
    }
    let b = p.boundary_value();
    if !(b > 0.0) {
        return Err(SpecError::Invariant(format!("mode profile (μ={mu}) is not positive at ρ")));
    }
    p.scale(target / b);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn indicial_roots_are_degrees() {
        for n in 2..6 {
            for k in 0..6 {
                let mu = (k * (k + n - 2)) as f64;
                assert!((indicial_exponent(n, mu) - k as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonic_modes_on_sphere_are_tangent_powers() {
        let s2 = SpaceForm::sphere(2);
        let rho = 1.3;
        for k in 1..5 {
            let p = radial_mode(s2, rho, (k * k) as f64, 0.0, 101).unwrap();
            let b = p.boundary_value();
            for (phi, v) in p.grid.nodes.iter().zip(&p.values) {
                let exact = ((phi / 2.0).tan() / (rho / 2.0).tan()).powi(k);
                assert!((v / b - exact).abs() < 1e-9, "k={k} φ={phi}");
            }
        }
    }

    #[test]
    fn harmonic_modes_on_disk_are_powers() {
        let e2 = SpaceForm::euclidean(2);
        let p = radial_mode(e2, 1.0, 9.0, 0.0, 51).unwrap();
        let b = p.boundary_value();
        for (r, v) in p.grid.nodes.iter().zip(&p.values) {
            assert!((v / b - r.powi(3)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_mode_is_rejected() {
        assert!(angular_radial_solution(SpaceForm::sphere(2), PI / 2.0, 0.0, 2.0).is_err());
    }
}
