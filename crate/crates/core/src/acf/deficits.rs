//! The deficit decomposition log J' ≥ δ_A + δ_B + δ_C with lower-bound certificates.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::characteristic::{alpha_hat, cap_eigen, cap_lambda2, characteristic_constant};
use super::energy::{energy_from_slices, field_slices, profile_from, AcfProfile, EnergyProfile, FieldSlices};
use super::field::{AdmissiblePair, PolarField};
use super::slice::{decompose, node_weights, Arc};
use crate::error::{domain, Result, SpecError};

/// Largest number of sine modes used per arc in the spectral δ_A.
pub const MAX_SINE_MODES: usize = 64;
/// Monotonicity tolerance: MONO_TOL_FACTOR · resolution · max J.
pub const MONO_TOL_FACTOR: f64 = 1.0;
/// Deficit-inequality tolerance multiplier on the grid resolution.
pub const GAP_TOL_FACTOR: f64 = 1.0;

/// Per-field slice data at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldTerms {
    /// First Dirichlet eigenvalue of the slice positivity set on the unit sphere (r²λ₁).
    pub mu1: f64,
    /// Second Dirichlet eigenvalue of the slice positivity set on the unit sphere.
    pub mu2: f64,
    pub alpha: f64,
    /// Longest-arc angle θ(r) (n = 2) or cap radius (n ≥ 3).
    pub theta: f64,
    /// Projection ∫ u·Y dσ on the unit-sphere normalized first eigenfunction.
    pub beta_hat: f64,
    /// Weighted ball energy.
    pub energy: f64,
    pub delta_a: f64,
    pub delta_a_rhs: f64,
    pub delta_a_tol: f64,
    pub delta_b: f64,
    pub delta_b_expanded: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitRow {
    pub r: f64,
    pub j: f64,
    pub log_j_prime: f64,
    pub log_j_prime_boundary: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_c: f64,
    pub fields: [FieldTerms; 2],
    /// Lower bounds of δ_C: two square functions (n = 2) or c(n)Σ|α−1|²/(r·max{α,2}).
    pub delta_c_rhs: Vec<f64>,
    pub delta_c_tol: f64,
    /// log J' − (δ_A + δ_B + δ_C)
    pub gap: f64,
    pub tol: f64,
    pub inequality_ok: bool,
    pub delta_a_ok: bool,
    pub delta_b_ok: bool,
    pub delta_c_ok: bool,
}

impl DeficitRow {
    pub fn bounds_ok(&self) -> bool {
        self.delta_a_ok && self.delta_b_ok && self.delta_c_ok
    }

    pub fn delta_sum(&self) -> f64 {
        self.delta_a + self.delta_b + self.delta_c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRadius {
    pub r: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfDeficits {
    pub name: String,
    pub dim: usize,
    pub resolution: f64,
    pub rows: Vec<DeficitRow>,
    pub skipped: Vec<SkippedRadius>,
    pub monotonicity_violation: f64,
    pub monotonicity_tol: f64,
    pub monotone: bool,
    pub inequality_holds: bool,
    pub bounds_hold: bool,
    /// Largest |central-difference − boundary-integral| log J' over the rows.
    pub max_cross_validation: f64,
}

/// Slices, energies and J of a pair, shared by all per-radius computations.
pub(crate) struct PairData {
    pub fs: [FieldSlices; 2],
    pub energy: [EnergyProfile; 2],
    pub profile: AcfProfile,
    pub weights: Vec<f64>,
}

impl PairData {
    pub fn new(pair: &AdmissiblePair) -> Self {
        let (f1, f2) = rayon::join(|| field_slices(&pair.u1), || field_slices(&pair.u2));
        let e1 = energy_from_slices(&pair.u1, &f1, 1);
        let e2 = energy_from_slices(&pair.u2, &f2, 1);
        let profile = profile_from(pair, [&e1, &e2]);
        Self { fs: [f1, f2], energy: [e1, e2], profile, weights: node_weights(&pair.u1) }
    }
}

/// Spectral pieces of one arc: Σ(μ_k − μ₁)b_k² (skipping the first mode when
/// `first`), captured mass Σb_k² and b₁.
fn arc_spectrum(a: &Arc, mu1: f64, first: bool) -> (f64, f64, f64) {
    let k_max = (a.points.len() / 2).clamp(1, MAX_SINE_MODES);
    let (mut excess, mut captured, mut b1) = (0.0, 0.0, 0.0);
    for k in 1..=k_max {
        let b = a.sine_coefficient(k);
        let mu = (k as f64 * PI / a.length).powi(2);
        captured += b * b;
        if k == 1 {
            b1 = b;
            if first {
                continue;
            }
        }
        excess += (mu - mu1) * b * b;
    }
    (excess, captured, b1)
}

/// Failure of a slice to define deficit terms at one radius.
enum SliceIssue {
    Empty,
    Fatal(SpecError),
}

fn field_terms_2d(field: &PolarField, d: &PairData, i: usize, k: usize) -> std::result::Result<FieldTerms, SliceIssue> {
    let s = &d.fs[i].slices[k];
    let dec = decompose(field, k, s).ok_or(SliceIssue::Empty)?;
    let r = dec.r;
    let e = d.energy[i].energy[k];
    if !(e > 0.0) {
        return Err(SliceIssue::Empty);
    }
    let mu1 = r * r * dec.lambda1;
    let mu2 = r * r * dec.lambda2;
    let alpha = PI / dec.theta;
    let (mut excess, mut captured, mut b1, mut mass) = (0.0, 0.0, 0.0, 0.0);
    for (a_idx, a) in dec.arcs.iter().enumerate() {
        let (x, c, b) = arc_spectrum(a, mu1, a_idx == dec.longest);
        excess += x;
        captured += c;
        mass += a.mass();
        if a_idx == dec.longest {
            b1 = b;
        }
    }
    let tail = (mass - captured).max(0.0);
    let scale = r * e;
    let delta_a = excess / scale;
    let delta_a_rhs = (mu2 - mu1) * (mass - b1 * b1) / scale;
    let delta_a_tol = (mu2 - mu1) * tail / scale + 1e-12 * delta_a_rhs.abs().max(1e-300);
    let (delta_b, delta_b_expanded) = delta_b_terms(field, d, i, k, alpha);
    Ok(FieldTerms {
        mu1,
        mu2,
        alpha,
        theta: dec.theta,
        beta_hat: b1,
        energy: e,
        delta_a,
        delta_a_rhs,
        delta_a_tol,
        delta_b,
        delta_b_expanded,
    })
}

/// δ_B by quadrature of the square and in expanded form.
fn delta_b_terms(field: &PolarField, d: &PairData, i: usize, k: usize, alpha: f64) -> (f64, f64) {
    let r = field.radii[k];
    let e = d.energy[i].energy[k];
    let row = field.row(k);
    let dr = &d.fs[i].dr[k];
    let w = &d.weights;
    let (mut sq, mut uu, mut ud, mut dd) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..row.len() {
        let (u, g) = (row[j], dr[j]);
        sq += w[j] * (alpha * u / r - g).powi(2);
        uu += w[j] * u * u;
        ud += w[j] * u * g;
        dd += w[j] * g * g;
    }
    let expanded = alpha * alpha * uu / (r * r) + dd - 2.0 * alpha / r * ud;
    (r * sq / e, r * expanded / e)
}

/// The slice positivity set as a polar cap: (radius, centred at the north pole).
fn polar_cap(field: &PolarField, d: &PairData, i: usize, k: usize) -> std::result::Result<(f64, bool), SliceIssue> {
    let arcs = &d.fs[i].slices[k].arcs;
    let r = field.radii[k];
    let unsupported = |what: &str| {
        SliceIssue::Fatal(SpecError::Unsupported(format!("slice r = {r}: {what}; only polar caps are supported for n ≥ 3")))
    };
    match arcs.len() {
        0 => Err(SliceIssue::Empty),
        1 => {
            let a = &arcs[0];
            let (north, south) = (a.start <= 0.0, a.end >= PI);
            match (north, south) {
                (true, false) => Ok((a.end, true)),
                (false, true) => Ok((PI - a.start, false)),
                (true, true) => Err(unsupported("positivity set is the whole sphere")),
                (false, false) => Err(unsupported("positivity set is a band")),
            }
        }
        n => Err(unsupported(&format!("{n} positivity components"))),
    }
}

fn field_terms_nd(field: &PolarField, d: &PairData, i: usize, k: usize) -> std::result::Result<FieldTerms, SliceIssue> {
    let (rho, north) = polar_cap(field, d, i, k)?;
    let n = field.dim;
    let r = field.radii[k];
    let e = d.energy[i].energy[k];
    if !(e > 0.0) {
        return Err(SliceIssue::Empty);
    }
    let fatal = SliceIssue::Fatal;
    let eig = cap_eigen(n - 1, rho).map_err(fatal)?;
    let mu1 = eig.lambda;
    let mu2 = cap_lambda2(n - 1, rho).map_err(fatal)?;
    let alpha = characteristic_constant(n, mu1, 1.0).map_err(fatal)?;
    let y = eig.interpolant();
    let row = field.row(k);
    let w = &d.weights;
    let mut b1 = 0.0;
    for (j, &phi) in field.angles.iter().enumerate() {
        let dist = if north { phi } else { PI - phi };
        if dist < rho {
            b1 += w[j] * row[j] * y.eval(dist);
        }
    }
    let s = &d.fs[i].slices[k];
    let scale = r * e;
    let delta_a = (s.tangential - mu1 * s.mass) / scale;
    let delta_a_rhs = (mu2 - mu1) * (s.mass - b1 * b1) / scale;
    let h = field.angle_step();
    let delta_a_tol = GAP_TOL_FACTOR * h * h * (s.tangential + mu2 * s.mass) / scale;
    let (delta_b, delta_b_expanded) = delta_b_terms(field, d, i, k, alpha);
    Ok(FieldTerms {
        mu1,
        mu2,
        alpha,
        theta: rho,
        beta_hat: b1,
        energy: e,
        delta_a,
        delta_a_rhs,
        delta_a_tol,
        delta_b,
        delta_b_expanded,
    })
}

/// c(n) of the n ≥ 3 δ_C bound, measured over pairs of disjoint polar caps.
pub fn cap_gap_constant(n: usize) -> Result<f64> {
    static C3: OnceLock<f64> = OnceLock::new();
    static C4: OnceLock<f64> = OnceLock::new();
    let cell = match n {
        3 => &C3,
        4 => &C4,
        _ => return domain(format!("cap gap constant tabulated for n ∈ {{3, 4}}, not {n}")),
    };
    if let Some(c) = cell.get() {
        return Ok(*c);
    }
    let ts: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let alphas = ts.iter().map(|&t| alpha_hat(n, t).map(|row| row.alpha)).collect::<Result<Vec<_>>>()?;
    let mut c = f64::INFINITY;
    for (a, &ta) in ts.iter().enumerate() {
        for (b, &tb) in ts.iter().enumerate() {
            if ta + tb > 1.0 + 1e-12 {
                continue;
            }
            let (x, y) = (alphas[a], alphas[b]);
            let den = (x - 1.0).powi(2) / x.max(2.0) + (y - 1.0).powi(2) / y.max(2.0);
            if den > 1e-14 {
                c = c.min(2.0 * (x + y - 2.0) / den);
            }
        }
    }
    // half the sampled infimum absorbs the sampling of the cap family
    Ok(*cell.get_or_init(|| 0.5 * c))
}

/// Deficit row at grid index k.
fn row_at(pair: &AdmissiblePair, d: &PairData, k: usize) -> std::result::Result<DeficitRow, SliceIssue> {
    let dim = pair.dim();
    let terms = |i: usize| {
        let f = pair.field(i);
        if dim == 2 {
            field_terms_2d(f, d, i, k)
        } else {
            field_terms_nd(f, d, i, k)
        }
    };
    let fields = [terms(0)?, terms(1)?];
    let r = pair.radii()[k];
    let p = &d.profile;
    let delta_a = fields[0].delta_a + fields[1].delta_a;
    let delta_b = fields[0].delta_b + fields[1].delta_b;
    let (a1, a2) = (fields[0].alpha, fields[1].alpha);
    let delta_c = 2.0 / r * (a1 + a2 - 2.0);
    let (delta_c_rhs, delta_c_tol) = if dim == 2 {
        let (t1, t2) = (fields[0].theta, fields[1].theta);
        let sq = |t: f64| 2.0 / r * (PI - t).powi(2) / (t * (2.0 * PI - t));
        let sl = |f: &FieldTerms| {
            let s = f.mu1.sqrt() / r;
            (s - 1.0 / r).powi(2) / s
        };
        let excess = (t1 + t2 - 2.0 * PI).max(0.0);
        // twice the first-order change of α₁ + α₂ when the arcs shrink to total 2π
        let tol = 2.0 / r * (a1 + a2) * (excess / PI + 1e-12);
        (vec![sq(t1) + sq(t2), sl(&fields[0]) + sl(&fields[1])], tol)
    } else {
        let c = cap_gap_constant(dim).map_err(SliceIssue::Fatal)?;
        let term = |a: f64| c * (a - 1.0).powi(2) / (r * a.max(2.0));
        // overlap of the reconstructed caps signals discretization error
        let excess = (fields[0].theta + fields[1].theta - PI).max(0.0);
        let tol = 2.0 / r * (a1 + a2) * (excess + 1e-12);
        (vec![term(a1) + term(a2)], tol)
    };
    let cd = p.log_j_prime[k];
    let bi = p.log_j_prime_boundary[k];
    let sum = delta_a + delta_b + delta_c;
    let gap = cd - sum;
    let res = pair.u1.resolution();
    let tol = (cd - bi).abs() + GAP_TOL_FACTOR * res * (sum.abs() + 4.0 / r) + delta_c_tol;
    let delta_a_ok = fields.iter().all(|f| f.delta_a >= f.delta_a_rhs - f.delta_a_tol);
    // the square and the expanded form agree up to cancellation in the expansion
    let delta_b_ok = fields
        .iter()
        .all(|f| (f.delta_b - f.delta_b_expanded).abs() <= 1e-10 * (f.alpha * f.alpha + 1.0) / r && f.delta_b >= 0.0);
    let delta_c_ok = delta_c_rhs.iter().all(|&b| delta_c >= b - delta_c_tol);
    Ok(DeficitRow {
        r,
        j: p.j[k],
        log_j_prime: cd,
        log_j_prime_boundary: bi,
        delta_a,
        delta_b,
        delta_c,
        fields,
        delta_c_rhs,
        delta_c_tol,
        gap,
        tol,
        inequality_ok: gap >= -tol,
        delta_a_ok,
        delta_b_ok,
        delta_c_ok,
    })
}

fn check_dim(pair: &AdmissiblePair, two: bool) -> Result<()> {
    match (two, pair.dim()) {
        (true, 2) => Ok(()),
        (false, 3 | 4) => Ok(()),
        (true, n) => domain(format!("two-dimensional deficit terms requested for n = {n}")),
        (false, n) => {
            Err(SpecError::Unsupported(format!("axisymmetric deficit terms are implemented for n ∈ {{3, 4}}, not {n}")))
        }
    }
}

fn single(pair: &AdmissiblePair, r: f64) -> Result<DeficitRow> {
    let k = pair.u1.radius_index(r)?;
    if k == 0 || k + 1 == pair.radii().len() {
        return domain(format!("radius {r} is not an interior grid radius"));
    }
    let d = PairData::new(pair);
    match row_at(pair, &d, k) {
        Ok(row) => Ok(row),
        Err(SliceIssue::Empty) => domain(format!("a positivity set is empty on the sphere of radius {r}")),
        Err(SliceIssue::Fatal(e)) => Err(e),
    }
}

/// δ_A, δ_B, δ_C and their lower bounds for a planar pair at an interior grid radius.
pub fn deficit_terms_2d(pair: &AdmissiblePair, r: f64) -> Result<DeficitRow> {
    check_dim(pair, true)?;
    single(pair, r)
}

/// The same for an axisymmetric pair in dimension 3 or 4.
pub fn deficit_terms_nd_axisym(pair: &AdmissiblePair, r: f64) -> Result<DeficitRow> {
    check_dim(pair, false)?;
    single(pair, r)
}

/// The deficit decomposition on every interior grid radius, with the monotonicity
/// check of J over the whole grid.
pub fn acf_deficits(pair: &AdmissiblePair) -> Result<AcfDeficits> {
    let dim = pair.dim();
    if dim != 2 {
        check_dim(pair, false)?;
    }
    acf_deficits_with(pair, &PairData::new(pair))
}

pub(crate) fn acf_deficits_with(pair: &AdmissiblePair, d: &PairData) -> Result<AcfDeficits> {
    if pair.dim() != 2 {
        check_dim(pair, false)?;
    }
    let nr = pair.radii().len();
    let results: Vec<(usize, std::result::Result<DeficitRow, SliceIssue>)> =
        (1..nr - 1).into_par_iter().map(|k| (k, row_at(pair, d, k))).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (k, res) in results {
        match res {
            Ok(row) => rows.push(row),
            Err(SliceIssue::Empty) => {
                skipped.push(SkippedRadius { r: pair.radii()[k], reason: "empty positivity set on the slice".into() })
            }
            Err(SliceIssue::Fatal(e)) => return Err(e),
        }
    }
    Ok(summarize(pair, &d.profile, rows, skipped))
}

fn summarize(pair: &AdmissiblePair, p: &AcfProfile, rows: Vec<DeficitRow>, skipped: Vec<SkippedRadius>) -> AcfDeficits {
    let resolution = pair.u1.resolution();
    let j_max = p.j.iter().fold(0.0f64, |a, &b| a.max(b));
    let monotonicity_violation = p.monotonicity_violation();
    let monotonicity_tol = MONO_TOL_FACTOR * resolution * j_max;
    let max_cross_validation = rows.iter().map(|r| (r.log_j_prime - r.log_j_prime_boundary).abs()).fold(0.0, f64::max);
    AcfDeficits {
        name: pair.name.clone(),
        dim: pair.dim(),
        resolution,
        inequality_holds: rows.iter().all(|r| r.inequality_ok),
        bounds_hold: rows.iter().all(|r| r.bounds_ok()),
        rows,
        skipped,
        monotonicity_violation,
        monotonicity_tol,
        monotone: monotonicity_violation <= monotonicity_tol,
        max_cross_validation,
    }
}
