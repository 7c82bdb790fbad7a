use serde::{Deserialize, Serialize};

use crate::dtn::BoundaryPerturbation;
use crate::error::{Result, SpecError};
use crate::numerics::quadrature;
use crate::spaceform::{SpaceForm, SpaceKind};

use super::{require_planar, PolarGrid};

/// h_ξ, the harmonic function on B_ρ with boundary values ξ. In two dimensions
/// every space form is conformally flat, so the degree-k profile is (T(φ)/T(ρ))^k
/// with T = tan(φ/2), φ, tanh(φ/2), and g' = k·g/sn(φ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicExtension {
    pub xi: BoundaryPerturbation,
    /// ∫_{B_ρ} |∇h|², the Ḣ^{1/2} seminorm squared of ξ.
    pub seminorm: f64,
}

fn conformal_t(space: SpaceForm, phi: f64) -> f64 {
    match space.kind {
        SpaceKind::Sphere => (0.5 * phi).tan(),
        SpaceKind::Euclidean => phi,
        SpaceKind::Hyperbolic => (0.5 * phi).tanh(),
    }
}

impl HarmonicExtension {
    /// Degree-k profile and its φ-derivative.
    pub fn profile(&self, degree: usize, phi: f64) -> (f64, f64) {
        profile(self.xi.space, self.xi.rho, degree, phi)
    }

    /// h, ∂_φ h, ∂_θ h at (φ, θ).
    pub fn eval(&self, phi: f64, theta: f64) -> [f64; 3] {
        let radius = self.xi.boundary_radius();
        let mut out = [0.0; 3];
        for (&(k, j), &a) in &self.xi.coeffs {
            let (g, dg) = self.profile(k, phi);
            let y = BoundaryPerturbation::basis(radius, k, j, theta);
            out[0] += a * g * y[0];
            out[1] += a * dg * y[0];
            out[2] += a * g * y[1];
        }
        out
    }
}

fn profile(space: SpaceForm, rho: f64, degree: usize, phi: f64) -> (f64, f64) {
    if degree == 0 {
        return (1.0, 0.0);
    }
    let k = degree as f64;
    let tr = conformal_t(space, rho);
    if phi <= 0.0 {
        let slope0 = if space.kind == SpaceKind::Euclidean { 1.0 } else { 0.5 };
        return (0.0, if degree == 1 { slope0 / tr } else { 0.0 });
    }
    let g = (conformal_t(space, phi) / tr).powf(k);
    (g, k * g / space.sn(phi))
}

pub fn harmonic_extension(xi: &BoundaryPerturbation) -> Result<HarmonicExtension> {
    require_planar(xi)?;
    let space = xi.space;
    let rho = space.check_radius(xi.rho)?;
    let mut seminorm = 0.0;
    for (&(k, _), &a) in &xi.coeffs {
        if k == 0 {
            continue;
        }
        let kk = (k * k) as f64;
        // |∇(gY)|² integrates to ∫(g'² + k²g²/sn²)sn dφ · ∫Y²dθ, and g' = kg/sn
        let radial = quadrature::integrate(
            |p| {
                let (g, _) = profile(space, rho, k, p);
                let s = space.sn(p);
                if s == 0.0 {
                    0.0
                } else {
                    2.0 * kk * g * g / s
                }
            },
            0.0,
            rho,
            1e-15,
        );
        seminorm += a * a * radial / space.sn(rho);
    }
    Ok(HarmonicExtension { xi: xi.clone(), seminorm })
}

/// Coefficients of the pulled-back energy and mass per dφ dθ at one point. For the
/// map (φ, θ) ↦ (R, θ), R = (1+h)φ, the energy is ∫ c11 u_φ² + 2c12 u_φu_θ + c22 u_θ²
/// and the mass ∫ w u².
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PointCoef {
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
    pub w: f64,
}

pub(crate) fn point_coefficients(ext: &HarmonicExtension, phi: f64, theta: f64) -> Result<PointCoef> {
    let space = ext.xi.space;
    let [h, hp, ht] = if ext.xi.coeffs.is_empty() { [0.0; 3] } else { ext.eval(phi, theta) };
    let big_r = (1.0 + h) * phi;
    let rp = 1.0 + h + phi * hp;
    let rt = phi * ht;
    if 1.0 + h <= 0.0 || rp <= 0.0 || big_r >= space.max_radius() {
        return Err(SpecError::PerturbationTooLarge(format!(
            "the pullback map is singular at φ = {phi:.4}, θ = {theta:.4} (1+h = {:.3e}, R_φ = {rp:.3e})",
            1.0 + h
        )));
    }
    let s = space.sn(big_r);
    Ok(PointCoef { c11: (rt * rt + s * s) / (rp * s), c12: -rt / s, c22: rp / s, w: rp * s })
}

/// A and m on the grid nodes, in the orthonormal frame (∂_φ, ∂_θ/sn(φ)) of B_ρ:
/// the pulled-back operator is −div(A∇û) = λ m û.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedCoefficients {
    pub grid: PolarGrid,
    pub rho: f64,
    pub h: Vec<f64>,
    pub grad_h: Vec<f64>,
    pub a11: Vec<f64>,
    pub a12: Vec<f64>,
    pub a22: Vec<f64>,
    pub m: Vec<f64>,
}

impl MappedCoefficients {
    /// Pointwise operator norm |A − Id| at node i.
    pub fn a_deviation(&self, i: usize) -> f64 {
        let (p, q, r) = (self.a11[i] - 1.0, self.a12[i], self.a22[i] - 1.0);
        let mean = 0.5 * (p + r);
        let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + rad).abs().max((mean - rad).abs())
    }

    /// ‖A − Id‖_{L²(B_ρ)} (Frobenius norm pointwise).
    pub fn a_deviation_l2(&self, space: SpaceForm) -> f64 {
        let d = self.grid.dphi(self.rho) * self.grid.dtheta();
        let mut s = 0.0;
        for j in 0..self.grid.n_phi {
            let vol = space.sn(self.grid.phi(self.rho, j)) * d;
            for k in 0..self.grid.n_theta {
                let i = j * self.grid.n_theta + k;
                let f = (self.a11[i] - 1.0).powi(2) + 2.0 * self.a12[i].powi(2) + (self.a22[i] - 1.0).powi(2);
                s += f * vol;
            }
        }
        s.sqrt()
    }
}

pub fn build_map_coefficients(xi: &BoundaryPerturbation, grid: PolarGrid) -> Result<MappedCoefficients> {
    let ext = harmonic_extension(xi)?;
    let space = xi.space;
    let rho = xi.rho;
    let n = grid.len();
    let mut out = MappedCoefficients {
        grid,
        rho,
        h: vec![0.0; n],
        grad_h: vec![0.0; n],
        a11: vec![0.0; n],
        a12: vec![0.0; n],
        a22: vec![0.0; n],
        m: vec![0.0; n],
    };
    for j in 0..grid.n_phi {
        let phi = grid.phi(rho, j);
        let s = space.sn(phi);
        for k in 0..grid.n_theta {
            let theta = grid.theta(k);
            let i = j * grid.n_theta + k;
            let [h, hp, ht] = ext.eval(phi, theta);
            let c = point_coefficients(&ext, phi, theta)?;
            out.h[i] = h;
            out.grad_h[i] = (hp * hp + (ht / s).powi(2)).sqrt();
            out.a11[i] = c.c11 / s;
            out.a12[i] = c.c12;
            out.a22[i] = c.c22 * s;
            out.m[i] = c.w / s;
            let det = out.a11[i] * out.a22[i] - out.a12[i] * out.a12[i];
            if !(out.a11[i] > 0.0 && det > 0.0 && out.m[i] > 0.0) {
                return Err(SpecError::PerturbationTooLarge(format!("A not positive definite at node ({j}, {k})")));
            }
        }
    }
    Ok(out)
}
