use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn::{BoundaryPerturbation, EtaConvention};
use crate::error::{Result, SpecError};
use crate::numerics::extrapolate::polynomial_at_zero;
use crate::spaceform::SpaceKind;

use super::constraints::project_constraints;
use super::solver::{eta_sum, perturbed_eigenvalue, SolverConfig};
use super::PolarGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiMode {
    pub degree: usize,
    pub index: usize,
    pub coeff: f64,
}

fn modes(xi: &BoundaryPerturbation) -> Vec<XiMode> {
    xi.coeffs.iter().map(|(&(degree, index), &coeff)| XiMode { degree, index, coeff }).collect()
}

/// One quantitative Faber-Krahn measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub space: SpaceKind,
    pub n: usize,
    pub rho: f64,
    /// projected perturbation
    pub xi_modes: Vec<XiMode>,
    pub lambda_omega: f64,
    pub deficit: f64,
    pub sym_diff: f64,
    pub efn_dist: f64,
    pub h_half_norm: f64,
    pub sv_prediction: Option<f64>,
    /// deficit / (sym_diff² + efn_dist)
    pub c_est: f64,
    pub grid: PolarGrid,
    pub convention: Option<EtaConvention>,
    pub lambda_ball: f64,
    pub lambda_ball_exact: f64,
    pub deficit_error_estimate: Option<f64>,
    pub h_half_seminorm: f64,
    pub alpha: f64,
    pub pullback_error: f64,
    /// deficit / sym_diff²
    pub quadratic_ratio: f64,
    /// deficit / ‖ξ‖²_{H^{1/2}}
    pub eta_hat: f64,
    pub delta_a0: f64,
    pub delta_a1: f64,
    pub iterations: usize,
}

/// project_constraints → perturbed_eigenvalue → distances.
pub fn fk_deficit_report(xi_raw: &BoundaryPerturbation, cfg: &SolverConfig) -> Result<DeficitReport> {
    let proj = project_constraints(xi_raw)?;
    let r = perturbed_eigenvalue(&proj.xi, cfg)?;
    let denom = r.sym_diff * r.sym_diff + r.efn_dist;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::NAN };
    Ok(DeficitReport {
        space: r.space,
        n: proj.xi.n(),
        rho: r.rho,
        xi_modes: modes(&proj.xi),
        lambda_omega: r.lambda_omega,
        deficit: r.deficit,
        sym_diff: r.sym_diff,
        efn_dist: r.efn_dist,
        h_half_norm: r.h_half_norm,
        sv_prediction: r.sv_prediction,
        c_est: ratio(r.deficit, denom),
        grid: r.grid,
        convention: r.convention,
        lambda_ball: r.lambda_ball,
        lambda_ball_exact: r.lambda_ball_exact,
        deficit_error_estimate: r.deficit_error_estimate,
        h_half_seminorm: r.h_half_seminorm,
        alpha: r.alpha,
        pullback_error: r.pullback_error,
        quadratic_ratio: ratio(r.deficit, r.sym_diff * r.sym_diff),
        eta_hat: ratio(r.deficit, r.h_half_norm),
        delta_a0: proj.delta_a0,
        delta_a1: proj.delta_a1,
        iterations: r.iterations,
    })
}

/// deficit(tξ)/t² on a ladder of t, extrapolated to t = 0 and compared with the
/// second-variation prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariationLimit {
    pub ts: Vec<f64>,
    pub ratios: Vec<f64>,
    pub extrapolated: f64,
    /// ρ² Σ η a²: half the second variation along the normal displacement ρξ
    pub prediction: f64,
    /// Σ η a²
    pub eta_mode_sum: f64,
    pub rel_error: f64,
    pub convention: EtaConvention,
    pub reports: Vec<DeficitReport>,
}

pub fn second_variation_limit(direction: &BoundaryPerturbation, ts: &[f64], cfg: &SolverConfig) -> Result<SecondVariationLimit> {
    if ts.len() < 2 {
        return Err(SpecError::Domain("need at least two values of t".into()));
    }
    let (eta_mode_sum, convention) = eta_sum(direction)?
        .ok_or_else(|| SpecError::Unsupported("the second-variation oracle is defined on the sphere".into()))?;
    let reports = ts.par_iter().map(|&t| fk_deficit_report(&direction.scaled(t), cfg)).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports.iter().zip(ts).map(|(r, t)| r.deficit / (t * t)).collect();
    let extrapolated = polynomial_at_zero(ts, &ratios);
    let prediction = direction.rho * direction.rho * eta_mode_sum;
    Ok(SecondVariationLimit {
        ts: ts.to_vec(),
        ratios,
        extrapolated,
        prediction,
        eta_mode_sum,
        rel_error: ((extrapolated - prediction) / prediction).abs(),
        convention,
        reports,
    })
}
