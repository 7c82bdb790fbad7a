//! Simply connected space forms and their geodesic balls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{quadrature, roots};

/// Smallest admissible distance of a sphere radius from 0 or π.
pub const EPS_RHO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Sphere,
    Euclidean,
    Hyperbolic,
}

impl std::str::FromStr for SpaceKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sphere" | "s" => Ok(Self::Sphere),
            "euclidean" | "e" | "flat" => Ok(Self::Euclidean),
            "hyperbolic" | "h" => Ok(Self::Hyperbolic),
            other => Err(format!("unknown space form '{other}'")),
        }
    }
}

impl std::fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Sphere => "sphere",
            Self::Euclidean => "euclidean",
            Self::Hyperbolic => "hyperbolic",
        })
    }
}

/// A space form of dimension `dim` (the dimension of the space caps live in).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceForm {
    pub kind: SpaceKind,
    pub dim: usize,
}

impl SpaceForm {
    pub fn new(kind: SpaceKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return domain("space dimension must be positive");
        }
        Ok(Self { kind, dim })
    }

    pub fn sphere(dim: usize) -> Self {
        Self { kind: SpaceKind::Sphere, dim }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { kind: SpaceKind::Euclidean, dim }
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self { kind: SpaceKind::Hyperbolic, dim }
    }

    /// Sectional curvature: +1, 0, −1.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere => 1.0,
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => -1.0,
        }
    }

    /// Metric factor sn(φ).
    pub fn sn(&self, phi: f64) -> f64 {
        match self.kind {
            SpaceKind::Sphere => phi.sin(),
            SpaceKind::Euclidean => phi,
            SpaceKind::Hyperbolic => phi.sinh(),
        }
    }

    /// Derivative sn'(φ).
    pub fn cs(&self, phi: f64) -> f64 {
        match self.kind {
            SpaceKind::Sphere => phi.cos(),
            SpaceKind::Euclidean => 1.0,
            SpaceKind::Hyperbolic => phi.cosh(),
        }
    }

    /// sn'/sn, the geodesic curvature of a distance sphere per principal direction.
    pub fn ct(&self, phi: f64) -> f64 {
        self.cs(phi) / self.sn(phi)
    }

    /// Supremum of admissible radii.
    pub fn max_radius(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere => PI,
            _ => f64::INFINITY,
        }
    }

    /// Validates a radius, rejecting ρ ≤ 0 and (on the sphere) ρ ≥ π, and clamps
    /// sphere radii into [ε, π−ε].
    pub fn check_radius(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() || rho <= 0.0 || rho >= self.max_radius() {
            return domain(format!("radius {rho} outside (0, {}) for the {}", self.max_radius(), self.kind));
        }
        Ok(match self.kind {
            SpaceKind::Sphere => rho.clamp(EPS_RHO, PI - EPS_RHO),
            _ => rho,
        })
    }

    /// Area of the unit sphere S^{dim−1}.
    pub fn unit_sphere_area(&self) -> f64 {
        unit_sphere_area(self.dim - 1)
    }

    /// Total volume of the space (finite only for the sphere).
    pub fn total_volume(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere => unit_sphere_area(self.dim),
            _ => f64::INFINITY,
        }
    }

    /// F(ρ) = ∫₀^ρ sn^{m−1}, the volume profile without the |S^{m−1}| factor.
    pub fn volume_profile(&self, rho: f64) -> f64 {
        let m = self.dim as i32;
        if rho <= 0.0 {
            return 0.0;
        }
        match (self.kind, m) {
            (_, 1) => rho,
            (SpaceKind::Sphere, 2) => 1.0 - rho.cos(),
            (SpaceKind::Hyperbolic, 2) => rho.cosh() - 1.0,
            (SpaceKind::Euclidean, _) => rho.powi(m) / m as f64,
            _ => {
                let s = *self;
                quadrature::integrate(move |p| s.sn(p).powi(m - 1), 0.0, rho, 1e-14)
            }
        }
    }
}

/// Area of the unit sphere S^k ⊂ R^{k+1}.
pub fn unit_sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * unit_sphere_area(k - 2),
    }
}

/// Geometry of the geodesic ball B_ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapGeometry {
    pub space: SpaceForm,
    pub radius: f64,
    pub volume: f64,
    pub boundary_area: f64,
    pub mean_curvature: f64,
}

impl CapGeometry {
    pub fn new(space: SpaceForm, rho: f64) -> Result<Self> {
        let r = space.check_radius(rho)?;
        Ok(Self {
            space,
            radius: r,
            volume: cap_volume(space, r)?,
            boundary_area: space.unit_sphere_area() * space.sn(r).powi(space.dim as i32 - 1),
            mean_curvature: mean_curvature(space, r)?,
        })
    }
}

/// |B_ρ| = |S^{m−1}| ∫₀^ρ sn^{m−1}. ρ = 0 is accepted and gives 0.
pub fn cap_volume(space: SpaceForm, rho: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(0.0);
    }
    let r = space.check_radius(rho)?;
    Ok(space.unit_sphere_area() * space.volume_profile(r))
}

/// Inverse of [`cap_volume`].
pub fn radius_for_volume(space: SpaceForm, v: f64) -> Result<f64> {
    let total = space.total_volume();
    if !(v > 0.0 && v < total) {
        return domain(format!("volume {v} outside (0, {total})"));
    }
    let mut hi = match space.kind {
        SpaceKind::Sphere => PI - EPS_RHO,
        _ => 1.0,
    };
    while space.kind != SpaceKind::Sphere && cap_volume(space, hi)? < v {
        hi *= 2.0;
    }
    let lo = if space.kind == SpaceKind::Sphere { EPS_RHO } else { 0.0 };
    let v_lo = if lo == 0.0 { 0.0 } else { cap_volume(space, lo)? };
    if v <= v_lo {
        return Ok(lo);
    }
    if v >= cap_volume(space, hi)? {
        return Ok(hi);
    }
    let rho = roots::brent(|r| cap_volume(space, r.max(1e-300)).unwrap_or(0.0) - v, lo, hi, 1e-15)?;
    Ok(rho)
}

/// Mean curvature H = (m−1)·sn'(ρ)/sn(ρ): the sum of principal curvatures, positive
/// for caps smaller than a hemisphere.
pub fn mean_curvature(space: SpaceForm, rho: f64) -> Result<f64> {
    let r = space.check_radius(rho)?;
    let h = (space.dim as f64 - 1.0) * space.ct(r);
    // cos(π/2) is 6e−17 in floating point; snap the equator to an exact zero
    Ok(if h.abs() < 1e-15 { 0.0 } else { h })
}
