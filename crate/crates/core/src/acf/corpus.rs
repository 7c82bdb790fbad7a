//! Built-in admissible pairs selected by name.

use std::f64::consts::PI;

use super::characteristic::{cap_eigen, characteristic_constant};
use super::field::{AcfGrid, AdmissiblePair, PolarField};
use crate::error::{domain, Result};

/// Angle of the rotated half-plane pair.
pub const ROTATION: f64 = 0.3;
/// Sector pair opening: each sector has angle π − SECTOR_GAP.
pub const SECTOR_GAP: f64 = 0.2;
/// Cap pair: each cap has polar radius π/2 − CAP_GAP.
pub const CAP_GAP: f64 = 0.2;
/// Drift rates b of the spiralling harmonic pairs.
pub const DRIFTS: [f64; 3] = [0.2, 0.1, 0.05];
/// Blowup pair: rotation ψ(r) = BLOWUP_AMPLITUDE · r^{BLOWUP_EXPONENT/2}, so that
/// J(r) − J(0) ~ r^{BLOWUP_EXPONENT}.
pub const BLOWUP_AMPLITUDE: f64 = 0.5;
pub const BLOWUP_EXPONENT: f64 = 0.5;

/// Names of the planar pairs in the default corpus.
pub const DEFAULT_CORPUS: [&str; 8] =
    ["halfplane", "halfplane-rotated", "homogeneity", "radial", "sector", "drift-0.2", "drift-0.1", "drift-0.05"];

/// Axially symmetric pairs in dimensions 3 and 4.
pub const AXISYM: [&str; 4] = ["halfspace-3", "halfspace-4", "cap-3", "cap-4"];

/// Every name accepted by [`corpus`], individual pairs and families.
pub fn corpus_names() -> Vec<&'static str> {
    let mut v = vec!["default", "all", "drift", "blowup", "axisym", "halfspace-3", "halfspace-4", "cap-3", "cap-4"];
    v.extend(DEFAULT_CORPUS);
    v
}

fn split(name: &str, grid: &AcfGrid, dim: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<AdmissiblePair> {
    let u1 = PolarField::from_fn(dim, grid, &f)?;
    let u2 = PolarField::from_fn(dim, grid, |r, t| -f(r, t))?;
    AdmissiblePair::new(name, u1, u2)
}

fn pair(name: &str, grid: &AcfGrid, f1: impl Fn(f64, f64) -> f64, f2: impl Fn(f64, f64) -> f64) -> Result<AdmissiblePair> {
    AdmissiblePair::new(name, PolarField::from_fn(2, grid, f1)?, PolarField::from_fn(2, grid, f2)?)
}

/// (x·ν)^± with ν = (−sin a, cos a), i.e. r·sin(θ − a)^±.
pub fn halfplane(grid: &AcfGrid, angle: f64) -> Result<AdmissiblePair> {
    split("halfplane", grid, 2, |r, t| r * (t - angle).sin())
}

/// A spiralling harmonic pair: with φ = (θ + b ln r) mod 2π, u₁ = r^{1+b²}e^{−bφ}sin φ on
/// φ < π and u₂ = r^{1+b²}e^{−b(φ−π)}(−sin φ) on φ > π. J(r) ∝ r^{4b²}.
pub fn drift(grid: &AcfGrid, b: f64) -> Result<AdmissiblePair> {
    let phase = move |r: f64, t: f64| (t + b * r.ln()).rem_euclid(2.0 * PI);
    let amp = 1.0 + b * b;
    pair(
        &format!("drift-{b}"),
        grid,
        move |r, t| {
            let p = phase(r, t);
            if p < PI {
                r.powf(amp) * (-b * p).exp() * p.sin()
            } else {
                0.0
            }
        },
        move |r, t| {
            let p = phase(r, t);
            if p > PI {
                -r.powf(amp) * (-b * (p - PI)).exp() * p.sin()
            } else {
                0.0
            }
        },
    )
}

/// Grid used by the blowup pair: the same log step, extended to r_min².
pub fn blowup_grid(grid: &AcfGrid) -> AcfGrid {
    AcfGrid { n_angle: grid.n_angle, n_radius: 2 * (grid.n_radius - 1) + 1, r_min: grid.r_min * grid.r_min }
}

/// r·sin(θ − ψ(r))^± with ψ(r) = c·r^{s/2}: a linear pair slowly rotating towards its
/// blowup, with J(r) = (π²/4)(1 + c²s² r^s/(4(s+2)))² exactly. Not subharmonic.
pub fn blowup(grid: &AcfGrid) -> Result<AdmissiblePair> {
    let g = blowup_grid(grid);
    let (c, s) = (BLOWUP_AMPLITUDE, BLOWUP_EXPONENT);
    Ok(split("blowup", &g, 2, move |r, t| r * (t - c * r.powf(0.5 * s)).sin())?.not_subharmonic())
}

/// Complementary half-spaces r·cos φ^± of an axisymmetric field in R^n.
pub fn halfspace(grid: &AcfGrid, n: usize) -> Result<AdmissiblePair> {
    check_axisym(n)?;
    let mut p = split("", grid, n, |r, phi| r * phi.cos())?;
    p.name = format!("halfspace-{n}");
    Ok(p)
}

/// Homogeneous harmonic cap pair r^α·ũ(φ), r^α·ũ(π − φ) with ũ the first eigenfunction
/// of the polar cap of radius π/2 − CAP_GAP in S^{n−1}.
pub fn cap_pair(grid: &AcfGrid, n: usize) -> Result<AdmissiblePair> {
    check_axisym(n)?;
    let rho = PI / 2.0 - CAP_GAP;
    let eig = cap_eigen(n - 1, rho)?;
    let alpha = characteristic_constant(n, eig.lambda, 1.0)?;
    let y = eig.interpolant();
    let cap = |d: f64| if d < rho { y.eval(d) } else { 0.0 };
    let u1 = PolarField::from_fn(n, grid, |r, phi| r.powf(alpha) * cap(phi))?;
    let u2 = PolarField::from_fn(n, grid, |r, phi| r.powf(alpha) * cap(PI - phi))?;
    AdmissiblePair::new(format!("cap-{n}"), u1, u2)
}

fn check_axisym(n: usize) -> Result<()> {
    if !(3..=4).contains(&n) {
        return domain(format!("axisymmetric pairs are built for n ∈ {{3, 4}}, not {n}"));
    }
    Ok(())
}

fn named(name: &str, grid: &AcfGrid) -> Result<AdmissiblePair> {
    let mut p = match name {
        "halfplane" => halfplane(grid, 0.0)?,
        "halfplane-rotated" => halfplane(grid, ROTATION)?.scaled(2.0, 0.5),
        "homogeneity" => split("", grid, 2, |r, t| r.powf(1.2) * t.sin())?,
        "radial" => split("", grid, 2, |r, t| (r + 0.3 * r * r) * t.sin())?,
        "sector" => {
            let th = PI - SECTOR_GAP;
            let a = PI / th;
            pair(
                "",
                grid,
                move |r, t| if t < th { r.powf(a) * (a * t).sin() } else { 0.0 },
                move |r, t| if t > 2.0 * PI - th { r.powf(a) * (a * (2.0 * PI - t)).sin() } else { 0.0 },
            )?
        }
        "blowup" => blowup(grid)?,
        "halfspace-3" => halfspace(grid, 3)?,
        "halfspace-4" => halfspace(grid, 4)?,
        "cap-3" => cap_pair(grid, 3)?,
        "cap-4" => cap_pair(grid, 4)?,
        other => match other.strip_prefix("drift-").map(str::parse::<f64>) {
            Some(Ok(b)) if b.is_finite() && b.abs() <= 1.0 => drift(grid, b)?,
            _ => {
                return domain(format!("unknown corpus pair '{other}' (known: {})", corpus_names().join(", ")));
            }
        },
    };
    p.name = name.to_string();
    Ok(p)
}

/// Pairs by name: a single pair, or one of the families "default" (the planar corpus),
/// "drift", "axisym" (n ∈ {3, 4} half-spaces and caps) and "all" (every built-in pair).
pub fn corpus(name: &str, grid: &AcfGrid) -> Result<Vec<AdmissiblePair>> {
    let names: Vec<String> = match name {
        "default" => DEFAULT_CORPUS.iter().map(|s| s.to_string()).collect(),
        "all" => DEFAULT_CORPUS.iter().chain(&AXISYM).chain(&["blowup"]).map(|s| s.to_string()).collect(),
        "drift" => DRIFTS.iter().map(|b| format!("drift-{b}")).collect(),
        "axisym" => AXISYM.iter().map(|s| s.to_string()).collect(),
        single => vec![single.to_string()],
    };
    names.iter().map(|n| named(n, grid)).collect()
}
