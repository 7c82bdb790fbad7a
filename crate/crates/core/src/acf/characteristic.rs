//! Characteristic constants of spherical caps, the α̂ convexity profile and the
//! sine misalignment integrals.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::quadrature::integrate_breaks;
use crate::radial::{cap_first_eigenvalue, cap_second_eigenvalue, EigenSolution};
use crate::spaceform::{radius_for_volume, SpaceForm};

/// Positive root of α² + (n−2)α − r²λ = 0.
pub fn characteristic_constant(n: usize, lambda: f64, r: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("ambient dimension {n} below 2"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return domain(format!("characteristic constant needs λ ≥ 0 and r > 0 (λ = {lambda}, r = {r})"));
    }
    let b = n as f64 - 2.0;
    let q = r * r * lambda;
    if q == 0.0 {
        return Ok(0.0);
    }
    // rationalized form avoids cancellation for small r²λ
    Ok(2.0 * q / (b + (b * b + 4.0 * q).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicConstant {
    pub alpha: f64,
    pub n: usize,
    pub lambda: f64,
    pub r: f64,
}

impl CharacteristicConstant {
    pub fn new(n: usize, lambda: f64, r: f64) -> Result<Self> {
        Ok(Self { alpha: characteristic_constant(n, lambda, r)?, n, lambda, r })
    }
}

type CapKey = (usize, i64);

fn cap_key(sphere_dim: usize, rho: f64) -> CapKey {
    (sphere_dim, (rho * 1e12).round() as i64)
}

/// First eigenpair of the cap of radius ρ in S^{sphere_dim}, memoized.
pub(crate) fn cap_eigen(sphere_dim: usize, rho: f64) -> Result<Arc<EigenSolution>> {
    static CACHE: OnceLock<Mutex<HashMap<CapKey, Arc<EigenSolution>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = cap_key(sphere_dim, rho);
    if let Some(e) = cache.lock().unwrap().get(&key) {
        return Ok(e.clone());
    }
    let e = Arc::new(cap_first_eigenvalue(SpaceForm::sphere(sphere_dim), key.1 as f64 * 1e-12)?);
    cache.lock().unwrap().insert(key, e.clone());
    Ok(e)
}

/// Second Dirichlet eigenvalue of the cap of radius ρ in S^{sphere_dim}, memoized.
pub(crate) fn cap_lambda2(sphere_dim: usize, rho: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<CapKey, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = cap_key(sphere_dim, rho);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Ok(*v);
    }
    let v = cap_second_eigenvalue(SpaceForm::sphere(sphere_dim), key.1 as f64 * 1e-12)?;
    cache.lock().unwrap().insert(key, v);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaHatRow {
    pub t: f64,
    pub rho: f64,
    pub lambda: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaHatRow {
    pub h: f64,
    pub delta_hat: f64,
    /// δ̂(h)/h²
    pub ratio: f64,
    /// δ̂(h) ≥ c_est·h²
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaHatProfile {
    pub n: usize,
    pub rows: Vec<AlphaHatRow>,
    pub deltas: Vec<DeltaHatRow>,
    /// δ̂(h₀)/h₀² at the smallest symmetric offset h₀, approximating α̂''(½).
    pub second_difference: f64,
    /// Half the second difference: the constant c with α̂''(½) = 2c.
    pub c_est: f64,
    /// All second differences of α̂ over consecutive equispaced triples inside
    /// |t − ½| ≤ CONVEXITY_WINDOW are ≥ 0 (α̂ turns concave near t = 1).
    pub convex: bool,
    pub warnings: Vec<String>,
}

/// Half-width of the window around ½ on which convexity and δ̂(h) ≥ c_est·h² are checked.
pub const CONVEXITY_WINDOW: f64 = 0.2;

/// Parameters t are clamped to [T_CLAMP, 1 − T_CLAMP].
pub const T_CLAMP: f64 = 1e-3;

/// α̂(t): characteristic constant of the cap of volume fraction t in S^{n−1}.
pub fn alpha_hat(n: usize, t: f64) -> Result<AlphaHatRow> {
    if n < 3 {
        return domain(format!("α̂ needs ambient dimension ≥ 3, got {n}"));
    }
    let s = SpaceForm::sphere(n - 1);
    let rho = radius_for_volume(s, t * s.total_volume())?;
    let lambda = cap_eigen(n - 1, rho)?.lambda;
    Ok(AlphaHatRow { t, rho, lambda, alpha: characteristic_constant(n, lambda, 1.0)? })
}

/// α̂ on a ladder of volume fractions, the symmetric deficits δ̂(h) = α̂(½+h) +
/// α̂(½−h) − 2 and the convexity constant at ½.
pub fn alpha_hat_profile(n: usize, ts: &[f64]) -> Result<AlphaHatProfile> {
    if n < 3 {
        return domain(format!("α̂ needs ambient dimension ≥ 3, got {n}"));
    }
    let mut warnings = Vec::new();
    let mut grid: Vec<f64> = Vec::with_capacity(ts.len());
    for &t in ts {
        if !t.is_finite() {
            return domain(format!("volume fraction {t} is not finite"));
        }
        let c = t.clamp(T_CLAMP, 1.0 - T_CLAMP);
        if c != t {
            warnings.push(format!("volume fraction {t} clamped to {c}"));
        }
        grid.push(c);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows = grid.iter().map(|&t| alpha_hat(n, t)).collect::<Result<Vec<_>>>()?;
    let find = |t: f64| rows.iter().find(|r| (r.t - t).abs() < 1e-12).map(|r| r.alpha);
    let centre = match find(0.5) {
        Some(a) => a,
        None => alpha_hat(n, 0.5)?.alpha,
    };
    let mut pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t > 0.5 + 1e-12)
        .filter_map(|r| {
            let h = r.t - 0.5;
            find(0.5 - h).map(|a| (h, r.alpha + a - 2.0 * centre))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (second_difference, c_est) = match pairs.first() {
        Some(&(h0, d0)) => (d0 / (h0 * h0), 0.5 * d0 / (h0 * h0)),
        None => {
            warnings.push("no symmetric pair around ½ in the ladder".into());
            (f64::NAN, f64::NAN)
        }
    };
    let deltas = pairs
        .iter()
        .map(|&(h, d)| DeltaHatRow { h, delta_hat: d, ratio: d / (h * h), bound_holds: d >= c_est * h * h })
        .collect();
    let window: Vec<&AlphaHatRow> = rows.iter().filter(|r| (r.t - 0.5).abs() <= CONVEXITY_WINDOW + 1e-12).collect();
    let convex = window.windows(3).all(|w| {
        let (h1, h2) = (w[1].t - w[0].t, w[2].t - w[1].t);
        if (h1 - h2).abs() > 1e-9 * h1.max(h2) {
            return true;
        }
        w[0].alpha + w[2].alpha - 2.0 * w[1].alpha >= -1e-9
    });
    Ok(AlphaHatProfile { n, rows, deltas, second_difference, c_est, convex, warnings })
}

/// The two sine integrals comparing half-sines shifted in angle or in frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineMisalignment {
    pub theta_hat: f64,
    pub lambda: f64,
    /// ∫₀^{2π} (sin(θ+θ̂)⁺ − sin θ⁺)²
    pub shift_integral: f64,
    /// shift_integral/θ̂², None at θ̂ = 0
    pub shift_ratio: Option<f64>,
    /// ∫ (sin(√λθ)⁺ − sin θ⁺)², the first term restricted to its first hump (0, π/√λ)
    pub frequency_integral: f64,
    /// frequency_integral/(1 − √λ)², None at λ = 1
    pub frequency_ratio: Option<f64>,
}

pub fn sine_misalignment(theta_hat: f64, lambda: f64) -> Result<SineMisalignment> {
    if !(0.0..2.0 * PI).contains(&theta_hat) {
        return domain(format!("shift {theta_hat} outside [0, 2π)"));
    }
    if !(lambda > 0.0) || (1.0 - lambda.sqrt()).abs() > 0.5 {
        return domain(format!("λ = {lambda} violates |1 − √λ| ≤ ½"));
    }
    let tol = 1e-14;
    let pos = |x: f64| x.sin().max(0.0);
    let shifted = |t: f64| pos(t + theta_hat) - pos(t);
    let mut breaks = vec![0.0, PI, 2.0 * PI, (PI - theta_hat).rem_euclid(2.0 * PI), (2.0 * PI - theta_hat).rem_euclid(2.0 * PI)];
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let shift_integral = integrate_breaks(|t| shifted(t).powi(2), &breaks, tol);
    let k = lambda.sqrt();
    let hump = PI / k;
    let freq = |t: f64| {
        let a = if t < hump { (k * t).sin().max(0.0) } else { 0.0 };
        (a - pos(t)).powi(2)
    };
    let mut breaks = vec![0.0, PI.min(hump), PI.max(hump)];
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let frequency_integral = integrate_breaks(freq, &breaks, tol);
    Ok(SineMisalignment {
        theta_hat,
        lambda,
        shift_integral,
        shift_ratio: (theta_hat > 0.0).then(|| shift_integral / (theta_hat * theta_hat)),
        frequency_integral,
        frequency_ratio: (lambda != 1.0).then(|| frequency_integral / (1.0 - k).powi(2)),
    })
}
