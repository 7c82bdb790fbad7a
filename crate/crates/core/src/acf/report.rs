//! Per-pair summary of every ACF check.

use serde::{Deserialize, Serialize};

use super::deficits::{acf_deficits_with, AcfDeficits, PairData, SkippedRadius};
use super::field::AdmissiblePair;
use super::stability::{gradient_energy_ratio_with, one_homogeneity_with, stability_fit_with, OneHomogeneity, StabilityFit};
use crate::error::Result;

/// Radius of the stability and one-homogeneity checks.
pub const REPORT_RHO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub n_angle: usize,
    pub n_radius: usize,
    pub r_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub violation: f64,
    pub tol: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    /// Asserted only for subharmonic pairs.
    pub applicable: bool,
    pub ok: bool,
    /// max over radii of (δ_A + δ_B + δ_C − log J')/tol; ≤ 1 when the inequality holds
    pub worst_gap_over_tol: f64,
    pub radii: usize,
    pub bounds_ok: bool,
    /// max |central-difference − boundary-integral| log J'
    pub max_cross_validation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityCheck {
    /// max over radii of r·(|δ_A| + |δ_B| + |δ_C|)
    pub max_scaled_deficit: f64,
    /// L2_error/Σ‖u_i‖²
    pub relative_fit_error: f64,
    /// Grid resolution h²: δ terms carry O(h²) discretization errors.
    pub deficit_tol: f64,
    /// h⁴: the fit is a squared distance with O(h²)-accurate parameters.
    pub fit_tol: f64,
    pub deficits_vanish: bool,
    pub fit_exact: bool,
    /// deficits_vanish ⇔ fit_exact
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfPairReport {
    pub name: String,
    pub dim: usize,
    pub grid: GridInfo,
    pub subharmonic: bool,
    pub j_one: f64,
    pub j_min: f64,
    pub monotonicity: MonotonicityCheck,
    pub inequality: InequalityCheck,
    pub skipped: Vec<SkippedRadius>,
    pub stability: StabilityFit,
    pub one_homogeneity: OneHomogeneity,
    pub gradient_ratio: [f64; 2],
    pub equality: EqualityCheck,
    pub passed: bool,
}

impl AcfPairReport {
    pub fn new(pair: &AdmissiblePair) -> Result<Self> {
        Ok(Self::with_deficits(pair)?.0)
    }

    /// The report together with the per-radius deficit rows.
    pub fn with_deficits(pair: &AdmissiblePair) -> Result<(Self, AcfDeficits)> {
        let d = PairData::new(pair);
        let deficits = acf_deficits_with(pair, &d)?;
        let stability = stability_fit_with(pair, &d, REPORT_RHO)?;
        let one_homogeneity = one_homogeneity_with(pair, &d, REPORT_RHO)?;
        let gradient_ratio = gradient_energy_ratio_with(pair, &d)?;
        let radii = pair.radii();
        let h = deficits.resolution;
        let monotonicity = MonotonicityCheck {
            violation: deficits.monotonicity_violation,
            tol: deficits.monotonicity_tol,
            ok: deficits.monotone,
        };
        let worst = deficits.rows.iter().map(|r| -r.gap / r.tol).reduce(f64::max).unwrap_or(0.0);
        let inequality = InequalityCheck {
            applicable: pair.subharmonic,
            ok: deficits.inequality_holds,
            worst_gap_over_tol: worst,
            radii: deficits.rows.len(),
            bounds_ok: deficits.bounds_hold,
            max_cross_validation: deficits.max_cross_validation,
        };
        let max_scaled_deficit =
            deficits.rows.iter().map(|r| r.r * (r.delta_a.abs() + r.delta_b.abs() + r.delta_c.abs())).fold(0.0, f64::max);
        let relative_fit_error = stability.l2_error / (stability.norm_sq[0] + stability.norm_sq[1]);
        let (deficit_tol, fit_tol) = (h, h * h);
        let deficits_vanish = max_scaled_deficit <= deficit_tol;
        let fit_exact = relative_fit_error <= fit_tol;
        let equality = EqualityCheck {
            max_scaled_deficit,
            relative_fit_error,
            deficit_tol,
            fit_tol,
            deficits_vanish,
            fit_exact,
            ok: deficits_vanish == fit_exact,
        };
        let passed = monotonicity.ok && (!inequality.applicable || (inequality.ok && inequality.bounds_ok)) && equality.ok;
        let report = Self {
            name: pair.name.clone(),
            dim: pair.dim(),
            grid: GridInfo { n_angle: pair.u1.n_angle(), n_radius: radii.len(), r_min: radii[0] },
            subharmonic: pair.subharmonic,
            j_one: *d.profile.j.last().unwrap(),
            j_min: d.profile.j[0],
            monotonicity,
            inequality,
            skipped: deficits.skipped.clone(),
            stability,
            one_homogeneity,
            gradient_ratio,
            equality,
            passed,
        };
        Ok((report, deficits))
    }
}
