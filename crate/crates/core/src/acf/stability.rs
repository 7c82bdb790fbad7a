//! Quantitative stability: closeness to one-homogeneous and to linear half-space pairs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::characteristic::cap_eigen;
use super::deficits::PairData;
use super::energy::{ball_mass, energy_from_slices};
use super::field::{AdmissiblePair, PolarField};
use super::slice::decompose;
use crate::error::{domain, Result};
use crate::numerics::quadrature::gauss_legendre;
use crate::spaceform::unit_sphere_area;

/// log(J(1)/J(ρ)) at or below this level is treated as zero.
pub const LOG_RATIO_NOISE: f64 = 1e-9;
/// Threshold on log(J(1)/J(ρ)) above which the stability fit falls back to the
/// trivial choice β_i = ‖u_i‖, ν = first axis.
pub const EPSILON_0: f64 = 1.0;
/// The blowup fit keeps scales 2^{−k−1} at least this factor above the smallest radius.
pub const BLOWUP_OCTAVE_MARGIN: f64 = 16.0;

/// ∫_{lo}^{1} f(r) dr from samples on the radial grid, by cubic interpolation in
/// log r on every cell (exact for cubic polynomials in log r).
pub(crate) fn integrate_to_one(radii: &[f64], f: &[f64], lo: f64) -> f64 {
    let n = radii.len();
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let g: Vec<f64> = radii.iter().zip(f).map(|(r, v)| r * v).collect();
    let (gx, gw) = gauss_legendre(4);
    let xl = lo.ln();
    let mut total = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (x[i].max(xl), x[i + 1]);
        if b <= a {
            continue;
        }
        let s = i.saturating_sub(1).min(n.saturating_sub(4));
        let idx = [s, s + 1, s + 2, s + 3];
        let interp = |t: f64| {
            let mut v = 0.0;
            for (p, &ip) in idx.iter().enumerate() {
                let mut l = 1.0;
                for (q, &iq) in idx.iter().enumerate() {
                    if p != q {
                        l *= (t - x[iq]) / (x[ip] - x[iq]);
                    }
                }
                v += l * g[ip];
            }
            v
        };
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        total += h * gx.iter().zip(&gw).map(|(t, w)| w * interp(c + h * t)).sum::<f64>();
    }
    total
}

fn check_rho(pair: &AdmissiblePair, rho: f64, upper: f64) -> Result<()> {
    let lo = pair.radii()[0];
    if !(rho >= lo * (1.0 - 1e-12) && rho <= upper * (1.0 + 1e-12)) {
        return domain(format!("ρ = {rho} outside [{lo}, {upper}]"));
    }
    Ok(())
}

/// Angular integral ∫ (a(θ) − b(θ))² dσ over the grid nodes.
fn slice_distance(weights: &[f64], a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
    a.iter().enumerate().map(|(j, v)| weights[j] * (v - b(j)).powi(2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityField {
    /// ∫_{B_1∖B_ρ} [r·u(1, θ) − u(r, θ)]²
    pub error: f64,
    /// ‖u‖²_{W^{1,2}(B_1)}
    pub norm_sq: f64,
    /// error / (log(J(1)/J(ρ))·‖u‖²_{W^{1,2}}), None when the log quotient is noise
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHomogeneity {
    pub rho: f64,
    pub log_ratio: f64,
    pub fields: [HomogeneityField; 2],
}

/// Distance of each field to the one-homogeneous extension of its trace on ∂B_1.
pub fn one_homogeneity_error(pair: &AdmissiblePair, rho: f64) -> Result<OneHomogeneity> {
    check_rho(pair, rho, 1.0)?;
    let d = PairData::new(pair);
    one_homogeneity_with(pair, &d, rho)
}

pub(crate) fn one_homogeneity_with(pair: &AdmissiblePair, d: &PairData, rho: f64) -> Result<OneHomogeneity> {
    let radii = pair.radii();
    let top = radii.len() - 1;
    let n = pair.dim() as i32;
    let log_ratio = (d.profile.j[top] / d.profile.at(rho)?).ln();
    let field = |i: usize| -> HomogeneityField {
        let f = pair.field(i);
        let trace = f.row(top);
        let dens: Vec<f64> = (0..radii.len())
            .map(|k| radii[k].powi(n - 1) * slice_distance(&d.weights, f.row(k), |j| radii[k] * trace[j]))
            .collect();
        let error = integrate_to_one(radii, &dens, rho);
        let norm_sq = w12_norm_sq(f, d, i);
        let ratio = (log_ratio > LOG_RATIO_NOISE).then(|| error / (log_ratio * norm_sq));
        HomogeneityField { error, norm_sq, ratio }
    };
    Ok(OneHomogeneity { rho, log_ratio, fields: [field(0), field(1)] })
}

/// (∫_{B_1} |∇u|², ∫_{B_1} u²) without weight.
fn ball_norms(f: &PolarField, d: &PairData, i: usize) -> (f64, f64) {
    let e = energy_from_slices(f, &d.fs[i], f.dim as i32 - 1);
    let m = ball_mass(f, &e.mass);
    (*e.energy.last().unwrap(), *m.last().unwrap())
}

fn w12_norm_sq(f: &PolarField, d: &PairData, i: usize) -> f64 {
    let (g, m) = ball_norms(f, d, i);
    g + m
}

/// ∫_{B_1}|∇u_i|² / ((J(1)/J(½))·∫_{B_1} u_i²) for both fields.
pub fn gradient_energy_ratio(pair: &AdmissiblePair) -> Result<[f64; 2]> {
    check_rho(pair, 0.5, 1.0)?;
    if pair.u1.is_zero() || pair.u2.is_zero() {
        return domain("gradient energy ratio of a pair with a vanishing field");
    }
    let d = PairData::new(pair);
    gradient_energy_ratio_with(pair, &d)
}

pub(crate) fn gradient_energy_ratio_with(pair: &AdmissiblePair, d: &PairData) -> Result<[f64; 2]> {
    let q = *d.profile.j.last().unwrap() / d.profile.at(0.5)?;
    let r = |i: usize| {
        let (g, m) = ball_norms(pair.field(i), d, i);
        g / (q * m)
    };
    Ok([r(0), r(1)])
}

/// Best linear pair β₁(x·ν)⁺, β₂(x·ν)⁻ for a pair on B_1∖B_ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityFit {
    pub rho: f64,
    pub beta: [f64; 2],
    /// Projections of the traces on ∂B_1 onto the slice first eigenfunctions.
    pub beta_hat: [f64; 2],
    pub nu: Vec<f64>,
    /// ν = (−sin a, cos a) for planar pairs.
    pub nu_angle: Option<f64>,
    /// Σ_i ∫_{B_1∖B_ρ} (u_i − β_i(x·ν)^±)²
    pub l2_error: f64,
    pub log_ratio: f64,
    /// ‖u_i‖²_{L²(B_1)}
    pub norm_sq: [f64; 2],
    /// l2_error / (log_ratio·Σ‖u_i‖²), None when the log quotient is noise
    pub ratio: Option<f64>,
    /// The trivial fit β_i = ‖u_i‖, ν = first axis was used (large log quotient).
    pub fallback: bool,
}

impl StabilityFit {
    /// The constant C in l2_error ≤ C·log(J(1)/J(ρ))·Σ‖u_i‖² realized by this pair.
    pub fn bound(&self, c: f64) -> f64 {
        c * self.log_ratio * (self.norm_sq[0] + self.norm_sq[1])
    }
}

fn circular_mean(a: f64, b: f64) -> f64 {
    (a.sin() + b.sin()).atan2(a.cos() + b.cos())
}

pub fn stability_fit(pair: &AdmissiblePair, rho: f64) -> Result<StabilityFit> {
    check_rho(pair, rho, 0.5)?;
    if pair.u1.is_zero() || pair.u2.is_zero() {
        return domain("stability fit of a pair with a vanishing field");
    }
    let d = PairData::new(pair);
    stability_fit_with(pair, &d, rho)
}

pub(crate) fn stability_fit_with(pair: &AdmissiblePair, d: &PairData, rho: f64) -> Result<StabilityFit> {
    let radii = pair.radii();
    let top = radii.len() - 1;
    let n = pair.dim();
    let log_ratio = (d.profile.j[top] / d.profile.at(rho)?).ln();
    let norm_sq = [ball_norms(&pair.u1, d, 0).1, ball_norms(&pair.u2, d, 1).1];
    let linear_norm = (unit_sphere_area(n - 1) / (2.0 * n as f64)).sqrt();
    let fallback = log_ratio >= EPSILON_0;
    // x·ν on the unit sphere at node j, for the planar angle a or the polar sign
    let (beta_hat, beta, nu, nu_angle, sign) = if fallback {
        let beta = [norm_sq[0].sqrt(), norm_sq[1].sqrt()];
        if n == 2 {
            (beta.map(|b| b * linear_norm), beta, vec![1.0, 0.0], Some(-PI / 2.0), 1.0)
        } else {
            let mut nu = vec![0.0; n];
            nu[n - 1] = 1.0;
            (beta.map(|b| b * linear_norm), beta, nu, None, 1.0)
        }
    } else if n == 2 {
        let mut bh = [0.0; 2];
        let mut shift = [0.0; 2];
        for i in 0..2 {
            let f = pair.field(i);
            let s = &d.fs[i].slices[top];
            let dec = decompose(f, top, s).ok_or_else(|| crate::error::SpecError::Domain("empty trace on ∂B_1".into()))?;
            let a = &dec.arcs[dec.longest];
            // nodal rule: exact for trigonometric traces sampled on the grid
            let y = |t: f64| {
                let x = (t - a.start).rem_euclid(2.0 * PI);
                if x < a.length {
                    (2.0 / a.length).sqrt() * (PI * x / a.length).sin()
                } else {
                    0.0
                }
            };
            bh[i] = f.angles.iter().enumerate().map(|(j, &t)| d.weights[j] * f.row(top)[j].max(0.0) * y(t)).sum();
            shift[i] = a.center() - if i == 0 { PI / 2.0 } else { 3.0 * PI / 2.0 };
        }
        let a = circular_mean(shift[0], shift[1]);
        (bh, bh.map(|b| b / linear_norm), vec![-a.sin(), a.cos()], Some(a), 1.0)
    } else {
        let mut bh = [0.0; 2];
        let mut north = [true; 2];
        for i in 0..2 {
            let f = pair.field(i);
            let arcs = &d.fs[i].slices[top].arcs;
            if arcs.len() != 1 {
                return Err(crate::error::SpecError::Unsupported("trace on ∂B_1 is not a polar cap".into()));
            }
            let (cap, is_north) = if arcs[0].start <= 0.0 { (arcs[0].end, true) } else { (PI - arcs[0].start, false) };
            north[i] = is_north;
            let eig = cap_eigen(n - 1, cap.min(PI - 1e-6))?;
            let y = eig.interpolant();
            // project on the eigenfunction normalized with the grid weights
            let (mut uy, mut yy) = (0.0, 0.0);
            for (j, &phi) in f.angles.iter().enumerate() {
                let dist = if is_north { phi } else { PI - phi };
                if dist < cap {
                    let v = y.eval(dist);
                    uy += d.weights[j] * f.row(top)[j] * v;
                    yy += d.weights[j] * v * v;
                }
            }
            bh[i] = if yy > 0.0 { uy / yy.sqrt() } else { 0.0 };
        }
        let s = if north[0] || !north[1] { 1.0 } else { -1.0 };
        let mut nu = vec![0.0; n];
        nu[n - 1] = s;
        (bh, bh.map(|b| b / linear_norm), nu, None, s)
    };
    let angles = &pair.u1.angles;
    let unit: Vec<f64> = match nu_angle {
        Some(a) => angles.iter().map(|t| (t - a).sin()).collect(),
        None => angles.iter().map(|p| sign * p.cos()).collect(),
    };
    let ni = n as i32;
    let dens: Vec<f64> = (0..radii.len())
        .map(|k| {
            let r = radii[k];
            let e1 = slice_distance(&d.weights, pair.u1.row(k), |j| beta[0] * r * unit[j].max(0.0));
            let e2 = slice_distance(&d.weights, pair.u2.row(k), |j| beta[1] * r * (-unit[j]).max(0.0));
            r.powi(ni - 1) * (e1 + e2)
        })
        .collect();
    let l2_error = integrate_to_one(radii, &dens, rho);
    let ratio = (log_ratio > LOG_RATIO_NOISE).then(|| l2_error / (log_ratio * (norm_sq[0] + norm_sq[1])));
    Ok(StabilityFit { rho, beta, beta_hat, nu, nu_angle, l2_error, log_ratio, norm_sq, ratio, fallback })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFit {
    pub k: usize,
    pub beta: [f64; 2],
    pub nu: Vec<f64>,
    pub l2_error: f64,
    /// ω(2^{−k−1}) = J(2^{−k−1}) − J(0⁺ proxy)
    pub omega: f64,
    /// √(Σ|β_i^k − β_i^{k−1}|² + |ν_k − ν_{k−1}|²), None at k = 0
    pub increment: Option<f64>,
    /// increment²/ω(2^{−k−1}), None at k = 0
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub scales: Vec<ScaleFit>,
    pub k_max: usize,
    /// Radius and value of J used as J(0⁺).
    pub proxy_radius: f64,
    pub j_zero_proxy: f64,
    /// exp of the regression slope of log(increment) against k.
    pub measured_rate: Option<f64>,
    /// exp of the regression slope of log √ω(2^{−k−1}) against k, over the same k.
    pub predicted_rate: Option<f64>,
    /// |ln measured − ln predicted| / |ln predicted|
    pub rate_error: Option<f64>,
    pub warnings: Vec<String>,
}

/// Stability fits of the dyadic rescalings u(2^{−k}x)/2^{−k}, k = 0..=k_max, at ρ = ½.
pub fn blowup_scale_fit(pair: &AdmissiblePair, k_max: usize) -> Result<BlowupFit> {
    let radii = pair.radii();
    let r0 = radii[0];
    let mut warnings = Vec::new();
    let mut k_used = k_max;
    while k_used > 0 && 0.5f64.powi(k_used as i32 + 1) < BLOWUP_OCTAVE_MARGIN * r0 * (1.0 - 1e-9) {
        k_used -= 1;
    }
    if k_used < k_max {
        warnings.push(format!("k_max truncated from {k_max} to {k_used}: the grid resolves radii down to {r0}"));
    }
    let d = PairData::new(pair);
    let j0 = d.profile.j[0];
    let mut scales: Vec<ScaleFit> = Vec::with_capacity(k_used + 1);
    for k in 0..=k_used {
        let s = 0.5f64.powi(k as i32);
        let fit = if k == 0 { stability_fit_with(pair, &d, 0.5)? } else { stability_fit(&pair.rescaled(s)?, 0.5)? };
        let omega = d.profile.at(0.5 * s)? - j0;
        let (increment, c2) = match scales.last() {
            Some(prev) => {
                let db: f64 = (0..2).map(|i| (fit.beta[i] - prev.beta[i]).powi(2)).sum();
                let dn: f64 = fit.nu.iter().zip(&prev.nu).map(|(a, b)| (a - b).powi(2)).sum();
                let inc = (db + dn).sqrt();
                (Some(inc), (omega > 0.0).then(|| inc * inc / omega))
            }
            None => (None, None),
        };
        scales.push(ScaleFit { k, beta: fit.beta, nu: fit.nu, l2_error: fit.l2_error, omega, increment, c2 });
    }
    let pts: Vec<(f64, f64, f64)> = scales
        .iter()
        .filter_map(|s| match s.increment {
            Some(inc) if inc > 0.0 && s.omega > 0.0 => Some((s.k as f64, inc.ln(), 0.5 * s.omega.ln())),
            _ => None,
        })
        .collect();
    let (measured_rate, predicted_rate) = if pts.len() >= 2 {
        let ks: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let li: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let lw: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let (a, _) = crate::numerics::linalg::linear_fit(&ks, &li);
        let (b, _) = crate::numerics::linalg::linear_fit(&ks, &lw);
        (Some(a.exp()), Some(b.exp()))
    } else {
        warnings.push("fewer than two nonzero increments; no decay rate".into());
        (None, None)
    };
    let rate_error = match (measured_rate, predicted_rate) {
        (Some(m), Some(p)) if p != 1.0 => Some((m.ln() - p.ln()).abs() / p.ln().abs()),
        _ => None,
    };
    Ok(BlowupFit {
        scales,
        k_max: k_used,
        proxy_radius: r0,
        j_zero_proxy: j0,
        measured_rate,
        predicted_rate,
        rate_error,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cubic_rule_is_exact_for_powers() {
        let g = crate::acf::AcfGrid::new(16, 40, 0.01).unwrap();
        let r = g.radii();
        // r^2 ln... : f(r) = r^{-1}(ln r)^3 integrates to −(ln ρ)^4/4 from ρ to 1
        let f: Vec<f64> = r.iter().map(|x| x.ln().powi(3) / x).collect();
        let rho: f64 = 0.3;
        let exact = -rho.ln().powi(4) / 4.0;
        assert!((integrate_to_one(&r, &f, rho) - exact).abs() < 1e-12);
    }
}
