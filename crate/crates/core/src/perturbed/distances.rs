use serde::{Deserialize, Serialize};

use crate::dtn::BoundaryPerturbation;
use crate::error::Result;
use crate::numerics::interp::lerp;
use crate::numerics::{quadrature, roots};

use super::extension::HarmonicExtension;
use super::{require_planar, PolarGrid};

/// |Ω_ξ Δ B_ρ| = ∫ |F((1+ξ)ρ) − F(ρ)| dθ with F(t) = ∫₀^t sn. The integrand has
/// kinks where ξ changes sign; those are located and integrated across exactly.
pub fn symmetric_difference(xi: &BoundaryPerturbation) -> Result<f64> {
    require_planar(xi)?;
    if xi.coeffs.is_empty() {
        return Ok(0.0);
    }
    let space = xi.space;
    let rho = xi.rho;
    let f_rho = space.volume_profile(rho);
    let xi_at = |t: f64| xi.eval(t).unwrap_or(0.0);
    let integrand = |t: f64| (space.volume_profile((1.0 + xi_at(t)) * rho) - f_rho).abs();
    let samples = 256 * (xi.max_degree() + 1);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut breaks = vec![0.0];
    let (mut t_prev, mut prev) = (0.0, xi_at(0.0));
    for i in 1..=samples {
        let t = two_pi * i as f64 / samples as f64;
        let cur = xi_at(t);
        if prev * cur < 0.0 {
            breaks.push(roots::brent(xi_at, t_prev, t, 1e-15)?);
        }
        (t_prev, prev) = (t, cur);
    }
    breaks.push(two_pi);
    Ok(breaks.windows(2).map(|w| quadrature::integrate(integrand, w[0], w[1], 1e-16)).sum())
}

/// ∫|u_Ω − u_{B_ρ}|² and the intermediate quantities of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionDistance {
    pub efn_dist: f64,
    /// ∫_{B_ρ} û u_{B_ρ}
    pub alpha: f64,
    /// ∫_{Ω ∩ B_ρ} |u_Ω − û|², û read in the reference coordinates of B_ρ
    pub pullback_error: f64,
}

/// Column-wise comparison: along each θ_k, u_Ω is the piecewise-linear function
/// through (R_j, û_j) with R_j = (1+h)φ_j, ending at 0 on ∂Ω; u_{B_ρ} uses the
/// unperturbed discrete eigenvector on the same grid so discretization errors cancel.
pub fn eigenfunction_distance(
    xi: &BoundaryPerturbation,
    ext: &HarmonicExtension,
    grid: PolarGrid,
    u_hat: &[f64],
    u_ball: &[f64],
) -> Result<EigenfunctionDistance> {
    require_planar(xi)?;
    let space = xi.space;
    let rho = xi.rho;
    let (np, nt) = (grid.n_phi, grid.n_theta);
    let dt = grid.dtheta();
    let dp = grid.dphi(rho);
    let (gx, gw) = quadrature::gauss_legendre(3);
    let mut ref_x: Vec<f64> = (0..np).map(|j| grid.phi(rho, j)).collect();
    ref_x.push(rho);
    let (mut efn, mut alpha, mut pull) = (0.0, 0.0, 0.0);
    let mut x_om = vec![0.0; np + 1];
    let mut y_om = vec![0.0; np + 1];
    let mut y_ref = vec![0.0; np + 1];
    let mut y_ball = vec![0.0; np + 1];
    for k in 0..nt {
        let theta = grid.theta(k);
        for j in 0..np {
            let phi = ref_x[j];
            x_om[j] = (1.0 + ext.eval(phi, theta)[0]) * phi;
            y_om[j] = u_hat[j * nt + k];
            y_ref[j] = u_hat[j * nt + k];
            y_ball[j] = u_ball[j * nt + k];
            alpha += u_hat[j * nt + k] * u_ball[j * nt + k] * space.sn(phi) * dp * dt;
        }
        let r_b = (1.0 + xi.eval(theta)?) * rho;
        x_om[np] = r_b;
        let mut breaks: Vec<f64> = x_om.iter().chain(ref_x.iter()).copied().collect();
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let (mut e, mut p) = (0.0, 0.0);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (xq, wq) in gx.iter().zip(&gw) {
                let t = c + h * xq;
                let uo = lerp(&x_om, &y_om, t);
                let ub = lerp(&ref_x, &y_ball, t);
                let jac = wq * h * space.sn(t);
                e += (uo - ub).powi(2) * jac;
                if t < rho.min(r_b) {
                    p += (uo - lerp(&ref_x, &y_ref, t)).powi(2) * jac;
                }
            }
        }
        efn += e * dt;
        pull += p * dt;
    }
    Ok(EigenfunctionDistance { efn_dist: efn, alpha, pullback_error: pull })
}
