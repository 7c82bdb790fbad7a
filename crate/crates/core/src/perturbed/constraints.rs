use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dtn::BoundaryPerturbation;
use crate::error::{Result, SpecError};
use crate::numerics::linalg::solve_dense;
use crate::spaceform::{SpaceForm, SpaceKind};

use super::require_planar;

/// θ samples used by the trapezoid rule for constraint integrals.
const THETA_SAMPLES: usize = 2048;

/// ∫₀^R sn(φ)² dφ: the horizontal moment of a radial segment.
fn horizontal_moment(space: SpaceForm, r: f64) -> f64 {
    match space.kind {
        SpaceKind::Sphere => 0.5 * r - 0.25 * (2.0 * r).sin(),
        SpaceKind::Euclidean => r * r * r / 3.0,
        SpaceKind::Hyperbolic => 0.25 * (2.0 * r).sinh() - 0.5 * r,
    }
}

/// ∫₀^R cs(φ) sn(φ) dφ: the vertical moment (the area for the plane).
fn vertical_moment(space: SpaceForm, r: f64) -> f64 {
    match space.kind {
        SpaceKind::Sphere => 0.5 * r.sin().powi(2),
        SpaceKind::Euclidean => 0.5 * r * r,
        SpaceKind::Hyperbolic => 0.5 * r.sinh().powi(2),
    }
}

/// A domain given along each θ sample as a union of φ-intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularDomain {
    pub space: SpaceForm,
    pub intervals: Vec<Vec<(f64, f64)>>,
}

impl AngularDomain {
    pub fn from_graph(xi: &BoundaryPerturbation, samples: usize) -> Result<Self> {
        require_planar(xi)?;
        let intervals = (0..samples)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / samples as f64;
                Ok(vec![(0.0, (1.0 + xi.eval(t)?) * xi.rho)])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { space: xi.space, intervals })
    }

    /// {lo < φ < hi}.
    pub fn band(space: SpaceForm, lo: f64, hi: f64, samples: usize) -> Self {
        Self { space, intervals: vec![vec![(lo, hi)]; samples] }
    }

    /// The cap of radius ρ centered at polar angle d on the meridian θ = 0, written
    /// as a radial graph about the pole (requires d < ρ).
    pub fn translated_cap(space: SpaceForm, rho: f64, d: f64, samples: usize) -> Result<Self> {
        let intervals = (0..samples)
            .map(|i| Ok(vec![(0.0, translated_cap_radius(space, rho, d, 2.0 * PI * i as f64 / samples as f64)?)]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { space, intervals })
    }

    pub fn volume(&self) -> f64 {
        let dt = 2.0 * PI / self.intervals.len() as f64;
        self.intervals.iter().flatten().map(|&(a, b)| self.space.volume_profile(b) - self.space.volume_profile(a)).sum::<f64>()
            * dt
    }

    /// ∫_Ω X dV for the ambient position X (unit sphere, hyperboloid, or the plane
    /// with third component the area).
    pub fn moment(&self) -> [f64; 3] {
        let dt = 2.0 * PI / self.intervals.len() as f64;
        let mut y = [0.0; 3];
        for (i, iv) in self.intervals.iter().enumerate() {
            let (s, c) = (dt * i as f64).sin_cos();
            for &(a, b) in iv {
                let g = horizontal_moment(self.space, b) - horizontal_moment(self.space, a);
                y[0] += g * c * dt;
                y[1] += g * s * dt;
                y[2] += (vertical_moment(self.space, b) - vertical_moment(self.space, a)) * dt;
            }
        }
        y
    }
}

/// Boundary distance from the pole, in direction θ, of the cap of radius ρ centered
/// at polar angle d on the meridian θ = 0.
pub fn translated_cap_radius(space: SpaceForm, rho: f64, d: f64, theta: f64) -> Result<f64> {
    if !(d.abs() < rho) {
        return Err(SpecError::Domain("the translated cap must contain the pole".into()));
    }
    Ok(match space.kind {
        SpaceKind::Sphere => {
            // cos ρ = cos d cos R + sin d cos θ sin R
            let (a, b) = (d.cos(), d.sin() * theta.cos());
            let r = (a * a + b * b).sqrt();
            (rho.cos() / r).acos() + b.atan2(a)
        }
        SpaceKind::Euclidean => {
            let p = d * theta.cos();
            p + (p * p - d * d + rho * rho).sqrt()
        }
        SpaceKind::Hyperbolic => {
            // cosh ρ = cosh d cosh R − sinh d cos θ sinh R
            let (a, b) = (d.cosh(), d.sinh() * theta.cos());
            let r = (a * a - b * b).sqrt();
            (rho.cosh() / r).acosh() + (b / a).atanh()
        }
    })
}

/// The set center: the normalized ambient barycenter on the sphere and hyperboloid,
/// the barycenter in the plane.
pub fn set_center(domain: &AngularDomain) -> Result<[f64; 3]> {
    let y = domain.moment();
    let vol = domain.volume();
    match domain.space.kind {
        SpaceKind::Sphere => {
            let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            if n <= 1e-12 * vol.max(1e-300) {
                return Err(SpecError::UndefinedCenter);
            }
            Ok([y[0] / n, y[1] / n, y[2] / n])
        }
        SpaceKind::Hyperbolic => {
            let q = y[2] * y[2] - y[0] * y[0] - y[1] * y[1];
            if q <= 0.0 {
                return Err(SpecError::UndefinedCenter);
            }
            let n = q.sqrt();
            Ok([y[0] / n, y[1] / n, y[2] / n])
        }
        SpaceKind::Euclidean => {
            if vol <= 0.0 {
                return Err(SpecError::UndefinedCenter);
            }
            Ok([y[0] / vol, y[1] / vol, 0.0])
        }
    }
}

/// |Ω_ξ| by the coarea formula.
pub fn domain_volume(xi: &BoundaryPerturbation) -> Result<f64> {
    Ok(AngularDomain::from_graph(xi, THETA_SAMPLES)?.volume())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub xi: BoundaryPerturbation,
    /// change of the degree-0 coefficient
    pub delta_a0: f64,
    /// Euclidean norm of the change of the degree-1 coefficients
    pub delta_a1: f64,
    pub newton_iterations: usize,
    pub volume_residual: f64,
    pub center_residual: f64,
}

/// Newton adjustment of (a₀, a_{1,0}, a_{1,1}) so that |Ω| = |B_ρ| and the set center
/// lies at the pole. The first step is the linearized projection.
pub fn project_constraints(xi_raw: &BoundaryPerturbation) -> Result<ProjectionReport> {
    require_planar(xi_raw)?;
    let space = xi_raw.space;
    let rho = xi_raw.rho;
    let radius = xi_raw.boundary_radius();
    let target = 2.0 * PI * space.volume_profile(rho);
    let keys = [(0usize, 0usize), (1, 0), (1, 1)];
    let mut xi = xi_raw.clone();
    let dt = 2.0 * PI / THETA_SAMPLES as f64;
    let basis: Vec<[f64; 3]> = (0..THETA_SAMPLES)
        .map(|i| {
            let t = i as f64 * dt;
            keys.map(|(k, j)| BoundaryPerturbation::basis(radius, k, j, t)[0])
        })
        .collect();
    let scale = target.max(1e-300);
    let mut last_step = f64::INFINITY;
    for it in 0..40 {
        let mut f = [0.0; 3];
        let mut jac = vec![vec![0.0; 3]; 3];
        for (i, b) in basis.iter().enumerate() {
            let t = i as f64 * dt;
            let (s, c) = t.sin_cos();
            let r = (1.0 + xi.eval(t)?) * rho;
            if !(r > 0.0 && r < space.max_radius()) {
                return Err(SpecError::PerturbationTooLarge("the graph leaves the admissible range".into()));
            }
            let sn = space.sn(r);
            let g = horizontal_moment(space, r);
            f[0] += space.volume_profile(r) * dt;
            f[1] += g * c * dt;
            f[2] += g * s * dt;
            for col in 0..3 {
                let dr = rho * b[col] * dt;
                jac[0][col] += sn * dr;
                jac[1][col] += sn * sn * c * dr;
                jac[2][col] += sn * sn * s * dr;
            }
        }
        f[0] -= target;
        let res = (f[0].abs() + f[1].abs() + f[2].abs()) / scale;
        if res < 1e-13 || last_step < 1e-15 {
            let d0 = xi.coeff(0, 0) - xi_raw.coeff(0, 0);
            let d1 = ((xi.coeff(1, 0) - xi_raw.coeff(1, 0)).powi(2) + (xi.coeff(1, 1) - xi_raw.coeff(1, 1)).powi(2)).sqrt();
            return Ok(ProjectionReport {
                xi,
                delta_a0: d0,
                delta_a1: d1,
                newton_iterations: it,
                volume_residual: f[0].abs(),
                center_residual: f[1].hypot(f[2]),
            });
        }
        let step = solve_dense(jac, f.map(|v| -v).to_vec())?;
        last_step = step.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (col, &(k, j)) in keys.iter().enumerate() {
            xi.set(k, j, xi.coeff(k, j) + step[col]);
        }
    }
    Err(SpecError::PerturbationTooLarge("volume/center projection did not converge".into()))
}
