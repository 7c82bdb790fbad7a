use serde::{Deserialize, Serialize};

use super::modes::{indicial_exponent, radial_mode, shoot};
use super::series::legendre_series_auto;
use super::{RadialGrid, PROFILE_NODES};
use crate::error::{Result, SpecError};
use crate::numerics::interp::Hermite;
use crate::numerics::{quadrature, roots};
use crate::spaceform::{SpaceForm, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    Series,
    Shooting,
}

/// First Dirichlet eigenpair of a geodesic cap with the radial profile u_ρ(φ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub space: SpaceForm,
    pub rho: f64,
    pub lambda: f64,
    pub method: EigenMethod,
    pub grid: RadialGrid,
    pub profile: Vec<f64>,
    pub profile_slope: Vec<f64>,
    /// u'_ρ(ρ), negative.
    pub boundary_slope: f64,
    /// ∫_{B_ρ} u² after normalization.
    pub normalization: f64,
}

impl EigenSolution {
    pub fn interpolant(&self) -> Hermite {
        Hermite::new(self.grid.nodes.clone(), self.profile.clone(), self.profile_slope.clone())
    }

    pub fn u_prime_abs(&self) -> f64 {
        self.boundary_slope.abs()
    }
}

/// Rough Bessel-type scale for the first root of the μ-mode problem.
fn lambda_scale(space: SpaceForm, rho: f64, mu: f64) -> f64 {
    let nu = indicial_exponent(space.dim, mu) + (space.dim as f64 - 2.0) / 2.0;
    let j = nu + 2.405 + 1.86 * nu.cbrt();
    let base = (j / rho).powi(2);
    match space.kind {
        SpaceKind::Hyperbolic => base + (space.dim as f64 - 1.0).powi(2) / 4.0,
        _ => base,
    }
}

fn dirichlet_value(space: SpaceForm, rho: f64, mu: f64, lambda: f64, method: EigenMethod) -> Result<f64> {
    match method {
        EigenMethod::Series => Ok(legendre_series_auto(space.dim, lambda, rho.cos())?.value),
        EigenMethod::Shooting => Ok(shoot(space, rho, mu, lambda)?[0]),
    }
}

/// The `which`-th (1-based) root in λ of the μ-mode Dirichlet condition at ρ.
pub fn cap_eigenvalue_with_mode(space: SpaceForm, rho: f64, mu: f64, which: usize, method: EigenMethod) -> Result<f64> {
    let rho = space.check_radius(rho)?;
    if method == EigenMethod::Series && (space.kind != SpaceKind::Sphere || mu != 0.0) {
        return Err(SpecError::Unsupported("series evaluation covers radial modes on the sphere only".into()));
    }
    let scale = lambda_scale(space, rho, mu);
    let step = scale / 12.0;
    let mut err = None;
    let mut f = |l: f64| match dirichlet_value(space, rho, mu, l, method) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            f64::NAN
        }
    };
    let mut lo = 0.0;
    let mut flo = f(lo);
    let mut found = 0;
    for i in 1..=4000 {
        let hi = step * i as f64;
        let fhi = f(hi);
        if !fhi.is_finite() {
            break;
        }
        if flo.signum() != fhi.signum() {
            found += 1;
            if found == which {
                let root = roots::brent(&mut f, lo, hi, 1e-13 * hi.max(1.0))?;
                if let Some(e) = err {
                    return Err(e);
                }
                return Ok(root);
            }
        }
        lo = hi;
        flo = fhi;
    }
    Err(err.unwrap_or_else(|| {
        SpecError::Numerical(format!("no eigenvalue bracket found (ρ={rho}, μ={mu}, root #{which}, step {step})"))
    }))
}

/// First eigenvalue only (no profile).
pub fn first_eigenvalue(space: SpaceForm, rho: f64) -> Result<f64> {
    let method = if space.kind == SpaceKind::Sphere { EigenMethod::Series } else { EigenMethod::Shooting };
    cap_eigenvalue_with_mode(space, rho, 0.0, 1, method).or_else(|e| {
        if method == EigenMethod::Series {
            cap_eigenvalue_with_mode(space, rho, 0.0, 1, EigenMethod::Shooting)
        } else {
            Err(e)
        }
    })
}

/// Second Dirichlet eigenvalue of a cap: the smaller of the second radial root and
/// the first root of the degree-one angular mode.
pub fn cap_second_eigenvalue(space: SpaceForm, rho: f64) -> Result<f64> {
    let method = if space.kind == SpaceKind::Sphere { EigenMethod::Series } else { EigenMethod::Shooting };
    let radial = cap_eigenvalue_with_mode(space, rho, 0.0, 2, method).or_else(|e| {
        if method == EigenMethod::Series {
            cap_eigenvalue_with_mode(space, rho, 0.0, 2, EigenMethod::Shooting)
        } else {
            Err(e)
        }
    })?;
    let angular = cap_eigenvalue_with_mode(space, rho, space.dim as f64 - 1.0, 1, EigenMethod::Shooting)?;
    Ok(radial.min(angular))
}

fn build(space: SpaceForm, rho: f64, method: EigenMethod) -> Result<EigenSolution> {
    let rho = space.check_radius(rho)?;
    let lambda = cap_eigenvalue_with_mode(space, rho, 0.0, 1, method)?;
    let grid = RadialGrid::uniform(rho, PROFILE_NODES)?;
    let (mut profile, mut slope) = match method {
        EigenMethod::Series => {
            let mut v = Vec::with_capacity(grid.len());
            let mut d = Vec::with_capacity(grid.len());
            for &phi in &grid.nodes {
                let e = legendre_series_auto(space.dim, lambda, phi.cos())?;
                v.push(e.value);
                d.push(-phi.sin() * e.derivative);
            }
            (v, d)
        }
        EigenMethod::Shooting => {
            let p = radial_mode(space, rho, 0.0, lambda, PROFILE_NODES)?;
            (p.values, p.slopes)
        }
    };
    let n = profile.len();
    let peak = profile.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if profile[n - 1].abs() > 1e-8 * peak {
        return Err(SpecError::Numerical(format!("eigenfunction misses the Dirichlet condition: u(ρ) = {}", profile[n - 1])));
    }
    profile[n - 1] = 0.0;
    if let Some(i) = (0..n - 1).find(|&i| profile[i] <= 0.0) {
        return Err(SpecError::Invariant(format!("first eigenfunction changes sign at φ = {}", grid.nodes[i])));
    }
    let h = Hermite::new(grid.nodes.clone(), profile.clone(), slope.clone());
    let m = space.dim as i32;
    let mass = space.unit_sphere_area() * quadrature::integrate(|p| h.eval(p).powi(2) * space.sn(p).powi(m - 1), 0.0, rho, 1e-15);
    let c = 1.0 / mass.sqrt();
    profile.iter_mut().for_each(|v| *v *= c);
    slope.iter_mut().for_each(|v| *v *= c);
    let boundary_slope = slope[n - 1];
    if !(boundary_slope < 0.0) {
        return Err(SpecError::Invariant("boundary slope of the first eigenfunction is not negative".into()));
    }
    Ok(EigenSolution { space, rho, lambda, method, grid, profile, profile_slope: slope, boundary_slope, normalization: 1.0 })
}

/// First eigenpair: series root-finding on the sphere, shooting elsewhere and for
/// caps where the series fails to converge (near the antipode).
pub fn cap_first_eigenvalue(space: SpaceForm, rho: f64) -> Result<EigenSolution> {
    if space.kind == SpaceKind::Sphere {
        build(space, rho, EigenMethod::Series).or_else(|_| build(space, rho, EigenMethod::Shooting))
    } else {
        build(space, rho, EigenMethod::Shooting)
    }
}

/// First eigenpair by ODE shooting in every space form.
pub fn cap_first_eigenvalue_shooting(space: SpaceForm, rho: f64) -> Result<EigenSolution> {
    build(space, rho, EigenMethod::Shooting)
}
