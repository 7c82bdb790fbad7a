//! Nearly spherical domains Ω = {φ < (1+ξ(θ))ρ} in a two-dimensional space form:
//! the pullback to B_ρ through the harmonic extension of ξ, the transformed
//! eigenvalue problem, volume and set-center constraints, and deficit reports.

mod constraints;
mod distances;
mod extension;
mod report;
mod solver;

use serde::{Deserialize, Serialize};

use crate::dtn::BoundaryPerturbation;
use crate::error::{Result, SpecError};

pub use constraints::{
    domain_volume, project_constraints, set_center, translated_cap_radius as translated_radius, AngularDomain, ProjectionReport,
};
pub use distances::{eigenfunction_distance, symmetric_difference, EigenfunctionDistance};
pub use extension::{build_map_coefficients, harmonic_extension, HarmonicExtension, MappedCoefficients};
pub use report::{fk_deficit_report, second_variation_limit, DeficitReport, SecondVariationLimit, XiMode};
pub use solver::{perturbed_eigenvalue, PerturbedEigenResult, SolverConfig};

/// Largest admitted value of the C²-proxy of ξ.
pub const SMALLNESS_GATE: f64 = 0.1;

/// Tensor grid on B_ρ: nodes φ_j = (j + ½)Δ for j < n_phi with Δ = ρ/(n_phi + ½), so
/// the Dirichlet row j = n_phi sits on ∂B_ρ, and θ_k = 2πk/n_theta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolarGrid {
    pub n_phi: usize,
    pub n_theta: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self { n_phi: 256, n_theta: 128 }
    }
}

impl PolarGrid {
    pub fn new(n_phi: usize, n_theta: usize) -> Result<Self> {
        if n_phi < 4 || n_theta < 8 {
            return Err(SpecError::Domain(format!("grid {n_phi}×{n_theta} too coarse (need ≥ 4×8)")));
        }
        Ok(Self { n_phi, n_theta })
    }

    pub fn dphi(&self, rho: f64) -> f64 {
        rho / (self.n_phi as f64 + 0.5)
    }

    pub fn phi(&self, rho: f64, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dphi(rho)
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_theta as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.dtheta()
    }

    pub fn len(&self) -> usize {
        self.n_phi * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid with half the resolution in each direction (for error estimates).
    pub fn coarsened(&self) -> Self {
        Self { n_phi: self.n_phi / 2, n_theta: self.n_theta / 2 }
    }
}

fn require_planar(xi: &BoundaryPerturbation) -> Result<()> {
    if xi.n() != 2 {
        return Err(SpecError::Unsupported("perturbed-domain solves are implemented for n = 2".into()));
    }
    Ok(())
}

/// max over θ of |ξ|, |ξ'|, |ξ''|: a computable stand-in for the C^{2,α} norm.
pub fn smallness_proxy(xi: &BoundaryPerturbation) -> Result<f64> {
    require_planar(xi)?;
    let samples = 64 * (xi.max_degree() + 1);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let v = xi.eval3(t)?;
        worst = worst.max(v[0].abs()).max(v[1].abs()).max(v[2].abs());
    }
    Ok(worst)
}

/// Rejects perturbations above the smallness gate.
pub fn check_smallness(xi: &BoundaryPerturbation) -> Result<f64> {
    let p = smallness_proxy(xi)?;
    if p > SMALLNESS_GATE {
        return Err(SpecError::PerturbationTooLarge(format!("C²-proxy of ξ is {p:.3e} > {SMALLNESS_GATE}")));
    }
    Ok(p)
}
