//! The shifted Dirichlet-to-Neumann operator on ∂B_ρ ⊂ S^n: mode eigenvalues η,
//! the spectral gap, and the second-variation quadratic form.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, SpecError};
use crate::numerics::quadrature;
use crate::radial::{self, ModeProfile};
use crate::spaceform::{mean_curvature, SpaceForm};

/// Default mode truncation for quadratic forms.
pub const DEFAULT_K_MAX: usize = 12;

/// A spherical-harmonic degree on S^{n−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeIndex {
    pub degree: usize,
    pub mu: f64,
    pub multiplicity: usize,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl ModeIndex {
    /// Degree-k harmonics on S^{n−1}: μ = k(k+n−2).
    pub fn new(n: usize, degree: usize) -> Self {
        let multiplicity = if n == 2 {
            if degree == 0 {
                1
            } else {
                2
            }
        } else {
            binom(degree + n - 1, n - 1) - if degree >= 2 { binom(degree + n - 3, n - 1) } else { 0 }
        };
        Self { degree, mu: (degree * (degree + n - 2)) as f64, multiplicity }
    }
}

/// Normalizations of η on offer. The printed eigenvalue formula, the mode expansion
/// of the printed second-variation formula, and the shape Hessian (full second
/// derivative of λ₁ under a volume-preserving normal graph) differ; calibration
/// selects between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaConvention {
    /// η = g'(ρ) + ½H|u'|²
    AsPrinted,
    /// η = |u'|g'(ρ) + ½H|u'|²
    ModeExpansion,
    /// η = |u'|g'(ρ) + H|u'|²
    ShapeHessian,
}

impl EtaConvention {
    pub const ALL: [EtaConvention; 3] = [Self::AsPrinted, Self::ModeExpansion, Self::ShapeHessian];

    pub fn eta(&self, g_prime: f64, u_prime: f64, h: f64) -> f64 {
        match self {
            Self::AsPrinted => g_prime + 0.5 * h * u_prime * u_prime,
            Self::ModeExpansion => u_prime * g_prime + 0.5 * h * u_prime * u_prime,
            Self::ShapeHessian => u_prime * g_prime + h * u_prime * u_prime,
        }
    }

    /// Curvature coefficient c of the quadrature form 2∫(|∇w|² − λw²) + cH|u'|²∫ξ²
    /// that this convention's mode sum is meant to reproduce.
    pub fn curvature_weight(&self) -> f64 {
        match self {
            Self::AsPrinted | Self::ModeExpansion => 1.0,
            Self::ShapeHessian => 2.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::AsPrinted => "as_printed",
            Self::ModeExpansion => "mode_expansion",
            Self::ShapeHessian => "shape_hessian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Cap scalars entering every η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapScalars {
    pub n: usize,
    pub rho: f64,
    pub lambda: f64,
    pub u_prime: f64,
    pub mean_curvature: f64,
}

impl CapScalars {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 2 {
            return domain("the D-to-N spectrum needs n ≥ 2");
        }
        let space = SpaceForm::sphere(n);
        let rho = space.check_radius(rho)?;
        let e = radial::cap_first_eigenvalue(space, rho)?;
        Ok(Self { n, rho, lambda: e.lambda, u_prime: e.u_prime_abs(), mean_curvature: mean_curvature(space, rho)? })
    }

    /// g for degree k ≥ 1, normalized by g(ρ) = |u'|.
    pub fn profile(&self, degree: usize) -> Result<ModeProfile> {
        if degree == 0 {
            return domain("degree 0 is excluded by the Fredholm alternative");
        }
        let mu = ModeIndex::new(self.n, degree).mu;
        radial::modes::profile_with_boundary_value(SpaceForm::sphere(self.n), self.rho, mu, self.lambda, self.u_prime)
    }
}

/// One D-to-N mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnMode {
    pub index: ModeIndex,
    pub g_prime: f64,
    pub eta: f64,
    pub profile: ModeProfile,
}

/// η table for one cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnSpectrum {
    pub scalars: CapScalars,
    pub convention: EtaConvention,
    pub modes: Vec<DtnMode>,
}

impl DtnSpectrum {
    pub fn build(n: usize, rho: f64, k_max: usize, convention: EtaConvention) -> Result<Self> {
        let sc = CapScalars::new(n, rho)?;
        let modes = (1..=k_max)
            .into_par_iter()
            .map(|k| {
                let profile = sc.profile(k)?;
                let g_prime = profile.boundary_slope();
                let eta = convention.eta(g_prime, sc.u_prime, sc.mean_curvature);
                Ok(DtnMode { index: ModeIndex::new(n, k), g_prime, eta, profile })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { scalars: sc, convention, modes })
    }

    pub fn eta(&self, degree: usize) -> Option<f64> {
        self.modes.iter().find(|m| m.index.degree == degree).map(|m| m.eta)
    }
}

// ---------------------------------------------------------------------------
// cache

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct EtaKey {
    n: usize,
    rho_bits: u64,
    degree: usize,
    convention: EtaConvention,
}

/// Cached mode data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEntry {
    pub mu: f64,
    pub g_prime: f64,
    pub eta: f64,
}

/// Process-wide η cache keyed by (n, ρ bits, degree, convention). Readers share the
/// lock; insertion takes it exclusively. Values are pure functions of the key so
/// insertion order never matters.
#[derive(Debug, Default)]
pub struct EtaCache {
    map: RwLock<BTreeMap<EtaKey, EtaEntry>>,
}

impl EtaCache {
    pub fn global() -> &'static EtaCache {
        static CACHE: OnceLock<EtaCache> = OnceLock::new();
        CACHE.get_or_init(EtaCache::default)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compute(&self, n: usize, rho: f64, degree: usize, convention: EtaConvention) -> Result<EtaEntry> {
        let key = EtaKey { n, rho_bits: rho.to_bits(), degree, convention };
        if let Some(e) = self.map.read().unwrap().get(&key) {
            return Ok(*e);
        }
        let sc = CapScalars::new(n, rho)?;
        let p = sc.profile(degree)?;
        let g_prime = p.boundary_slope();
        let entry =
            EtaEntry { mu: ModeIndex::new(n, degree).mu, g_prime, eta: convention.eta(g_prime, sc.u_prime, sc.mean_curvature) };
        self.map.write().unwrap().entry(key).or_insert(entry);
        Ok(entry)
    }

    /// Stores an entry computed elsewhere; an existing entry for the key is kept.
    pub fn insert(&self, n: usize, rho: f64, degree: usize, convention: EtaConvention, entry: EtaEntry) {
        let key = EtaKey { n, rho_bits: rho.to_bits(), degree, convention };
        self.map.write().unwrap().entry(key).or_insert(entry);
    }

    /// Writes every entry as CSV rows (n, rho, degree, mu, g_prime_rho, eta, convention), sorted by key.
    pub fn save_csv(&self, path: &Path) -> std::io::Result<()> {
        let map = self.map.read().unwrap();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(ETA_COLUMNS)?;
        for (k, e) in map.iter() {
            w.write_record(eta_record(k.n, f64::from_bits(k.rho_bits), k.degree, e, k.convention))?;
        }
        w.flush()
    }

    /// Merges entries from a CSV produced by [`EtaCache::save_csv`].
    pub fn load_csv(&self, path: &Path) -> Result<usize> {
        let mut r = csv::Reader::from_path(path).map_err(|e| SpecError::Ingestion { line: 0, msg: e.to_string() })?;
        let mut map = self.map.write().unwrap();
        let mut count = 0;
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let bad = |msg: &str| SpecError::Ingestion { line, msg: msg.to_string() };
            let rec = rec.map_err(|e| bad(&e.to_string()))?;
            if rec.len() != 7 {
                return Err(bad("expected 7 columns"));
            }
            let num = |j: usize| rec[j].trim().parse::<f64>().map_err(|_| bad("malformed number"));
            let int = |j: usize| rec[j].trim().parse::<usize>().map_err(|_| bad("malformed integer"));
            let convention = EtaConvention::parse(rec[6].trim()).ok_or_else(|| bad("unknown convention"))?;
            let key = EtaKey { n: int(0)?, rho_bits: num(1)?.to_bits(), degree: int(2)?, convention };
            map.insert(key, EtaEntry { mu: num(3)?, g_prime: num(4)?, eta: num(5)? });
            count += 1;
        }
        Ok(count)
    }
}

pub const ETA_COLUMNS: [&str; 7] = ["n", "rho", "degree", "mu", "g_prime_rho", "eta", "convention"];

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn eta_record(n: usize, rho: f64, degree: usize, e: &EtaEntry, c: EtaConvention) -> Vec<String> {
    vec![n.to_string(), fmt17(rho), degree.to_string(), fmt17(e.mu), fmt17(e.g_prime), fmt17(e.eta), c.name().to_string()]
}

// ---------------------------------------------------------------------------
// calibration

/// Per-convention calibration diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionScore {
    pub convention: EtaConvention,
    /// max over the calibration grid of |η(deg 1)|/η(deg 2)
    pub nullity: f64,
    /// max relative gap between the mode sum and the convention's own quadrature form
    pub form_mismatch: f64,
    /// max relative gap between the mode sum and the printed quadrature form (c = 1)
    pub printed_form_mismatch: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub selected: EtaConvention,
    pub scores: Vec<ConventionScore>,
}

pub const NULLITY_TOL: f64 = 1e-6;
pub const FORM_TOL: f64 = 1e-8;

/// Scores every convention on n ∈ {2, 3}, ρ ∈ {π/3, π/2, 2π/3} and picks the one with
/// degree-one nullity and agreement between its mode sum and its quadrature form.
pub fn calibrate() -> Result<Calibration> {
    let grid: Vec<(usize, f64)> =
        [2usize, 3].iter().flat_map(|&n| [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0].map(|r| (n, r))).collect();
    let per_point = grid
        .par_iter()
        .map(|&(n, rho)| {
            let sc = CapScalars::new(n, rho)?;
            let g1 = sc.profile(1)?;
            let g2 = sc.profile(2)?;
            let e2 = energy_integral(&sc, &g2)?;
            Ok((sc, g1.boundary_slope(), g2.boundary_slope(), e2))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scores = Vec::new();
    for c in EtaConvention::ALL {
        let (mut nullity, mut mismatch, mut printed) = (0.0f64, 0.0f64, 0.0f64);
        for (sc, gp1, gp2, e2) in &per_point {
            let eta1 = c.eta(*gp1, sc.u_prime, sc.mean_curvature);
            let eta2 = c.eta(*gp2, sc.u_prime, sc.mean_curvature);
            nullity = nullity.max((eta1 / eta2).abs());
            let hu2 = sc.mean_curvature * sc.u_prime * sc.u_prime;
            let mode_sum = 2.0 * eta2;
            let own = 2.0 * e2 + c.curvature_weight() * hu2;
            let print = 2.0 * e2 + hu2;
            mismatch = mismatch.max(((mode_sum - own) / own).abs());
            printed = printed.max(((mode_sum - print) / print).abs());
        }
        let accepted = nullity < NULLITY_TOL && mismatch < FORM_TOL;
        scores.push(ConventionScore {
            convention: c,
            nullity,
            form_mismatch: mismatch,
            printed_form_mismatch: printed,
            accepted,
        });
    }
    let selected = scores
        .iter()
        .find(|s| s.accepted)
        .map(|s| s.convention)
        .ok_or_else(|| SpecError::Invariant("no η convention passes calibration".into()))?;
    Ok(Calibration { selected, scores })
}

/// Calibration result, computed once per process.
pub fn calibration() -> Result<&'static Calibration> {
    static CAL: OnceLock<std::result::Result<Calibration, SpecError>> = OnceLock::new();
    CAL.get_or_init(calibrate).as_ref().map_err(Clone::clone)
}

pub fn calibrated_convention() -> Result<EtaConvention> {
    Ok(calibration()?.selected)
}

/// η for degree k under the calibrated convention.
pub fn dtn_eigenvalue(n: usize, rho: f64, k: usize) -> Result<f64> {
    dtn_eigenvalue_with(n, rho, k, calibrated_convention()?)
}

pub fn dtn_eigenvalue_with(n: usize, rho: f64, k: usize, convention: EtaConvention) -> Result<f64> {
    if k == 0 {
        return domain("degree 0 is excluded: no mean-zero extension exists");
    }
    Ok(EtaCache::global().get_or_compute(n, rho, k, convention)?.eta)
}

/// ∫_{B_ρ}(|∇w|² − λw²) for w = g·Y with ∫_{∂B_ρ} Y² = 1.
pub fn energy_integral(sc: &CapScalars, g: &ModeProfile) -> Result<f64> {
    let h = g.interpolant();
    let space = SpaceForm::sphere(sc.n);
    let m1 = sc.n as i32 - 1;
    let f = |p: f64| {
        if p == 0.0 {
            return 0.0;
        }
        let (v, d) = h.eval2(p);
        let s = space.sn(p);
        (d * d + g.mu * v * v / (s * s) - sc.lambda * v * v) * s.powi(m1)
    };
    let nodes = &g.grid.nodes;
    let mut total = 0.0;
    for w in nodes.windows(2) {
        total += quadrature::gl_panel(&f, w[0], w[1]);
    }
    Ok(total / space.sn(sc.rho).powi(m1))
}

/// L² mass ∫_{B_ρ} w² for w = g·Y with ∫_{∂B_ρ} Y² = 1.
pub fn mass_integral(sc: &CapScalars, g: &ModeProfile) -> f64 {
    let h = g.interpolant();
    let space = SpaceForm::sphere(sc.n);
    let m1 = sc.n as i32 - 1;
    let total: f64 = g
        .grid
        .nodes
        .windows(2)
        .map(|w| quadrature::gl_panel(&|p: f64| h.eval(p).powi(2) * space.sn(p).powi(m1), w[0], w[1]))
        .sum();
    total / space.sn(sc.rho).powi(m1)
}

// ---------------------------------------------------------------------------
// gap scan

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub n: usize,
    pub rho: f64,
    pub degree: usize,
    pub mu: f64,
    pub g_prime_rho: f64,
    pub eta: f64,
    pub convention: EtaConvention,
}

/// Checks on h = g_{deg 1} − g_{deg 2} for one ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HCheck {
    pub rho: f64,
    pub h_at_0: f64,
    pub h_at_rho: f64,
    pub min_interior: f64,
    pub h_prime_rho: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub n: usize,
    pub convention: EtaConvention,
    pub rows: Vec<EtaRow>,
    pub min_eta_deg2: f64,
    pub max_rel_eta_deg1: f64,
    pub h_checks: Vec<HCheck>,
    pub increasing_in_degree: bool,
    pub all_ok: bool,
}

pub fn spectral_gap_scan(n: usize, rho_grid: &[f64], k_max: usize) -> Result<GapScan> {
    if k_max < 2 {
        return domain("the gap scan needs k_max ≥ 2");
    }
    let convention = calibrated_convention()?;
    let per_rho = rho_grid
        .par_iter()
        .map(|&rho| {
            let spec = DtnSpectrum::build(n, rho, k_max, convention)?;
            let (g1, g2) = (&spec.modes[0].profile, &spec.modes[1].profile);
            let interior: Vec<f64> = (1..g1.values.len() - 1).map(|i| g1.values[i] - g2.values[i]).collect();
            let last = g1.values.len() - 1;
            let check = HCheck {
                rho: spec.scalars.rho,
                h_at_0: g1.values[0] - g2.values[0],
                h_at_rho: g1.values[last] - g2.values[last],
                min_interior: interior.iter().copied().fold(f64::INFINITY, f64::min),
                h_prime_rho: g1.boundary_slope() - g2.boundary_slope(),
                ok: false,
            };
            Ok((spec, check))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut h_checks = Vec::new();
    let (mut min2, mut max1) = (f64::INFINITY, 0.0f64);
    let mut increasing = true;
    for (spec, mut check) in per_rho {
        let eta2 = spec.eta(2).unwrap();
        min2 = min2.min(eta2);
        max1 = max1.max((spec.eta(1).unwrap() / eta2).abs());
        increasing &= spec.modes.windows(2).all(|w| w[1].eta > w[0].eta);
        let scale = spec.scalars.u_prime;
        check.ok = check.h_at_0.abs() <= 1e-12 * scale
            && check.h_at_rho.abs() <= 1e-12 * scale
            && check.min_interior > 0.0
            && check.h_prime_rho < 0.0;
        h_checks.push(check);
        for m in &spec.modes {
            rows.push(EtaRow {
                n,
                rho: spec.scalars.rho,
                degree: m.index.degree,
                mu: m.index.mu,
                g_prime_rho: m.g_prime,
                eta: m.eta,
                convention,
            });
        }
    }
    let all_ok = min2 > 0.0 && max1 < NULLITY_TOL && increasing && h_checks.iter().all(|c| c.ok);
    Ok(GapScan {
        n,
        convention,
        rows,
        min_eta_deg2: min2,
        max_rel_eta_deg1: max1,
        h_checks,
        increasing_in_degree: increasing,
        all_ok,
    })
}

// ---------------------------------------------------------------------------
// boundary perturbations and the second variation

/// ξ = Σ a_{k,j} Y_{k,j} on ∂B_ρ ⊂ S^n with ∫_{∂B_ρ} Y² = 1. For n = 2 the index j
/// is 0 for cos kθ and 1 for sin kθ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPerturbation {
    pub space: SpaceForm,
    pub rho: f64,
    pub coeffs: BTreeMap<(usize, usize), f64>,
}

impl BoundaryPerturbation {
    /// A perturbation of ∂B_ρ ⊂ S^n.
    pub fn new(n: usize, rho: f64) -> Self {
        Self::in_space(SpaceForm::sphere(n), rho)
    }

    pub fn in_space(space: SpaceForm, rho: f64) -> Self {
        Self { space, rho, coeffs: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.space.dim
    }

    /// sn(ρ), the radius of the boundary circle.
    pub fn boundary_radius(&self) -> f64 {
        self.space.sn(self.rho)
    }

    pub fn with(mut self, degree: usize, index: usize, coeff: f64) -> Self {
        self.set(degree, index, coeff);
        self
    }

    pub fn set(&mut self, degree: usize, index: usize, coeff: f64) {
        if coeff == 0.0 {
            self.coeffs.remove(&(degree, index));
        } else {
            self.coeffs.insert((degree, index), coeff);
        }
    }

    pub fn coeff(&self, degree: usize, index: usize) -> f64 {
        self.coeffs.get(&(degree, index)).copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut out = Self::in_space(self.space, self.rho);
        for (&(k, j), &a) in &self.coeffs {
            out.set(k, j, t * a);
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn mean_coeff(&self) -> f64 {
        self.coeff(0, 0)
    }

    fn check_circle(&self) -> Result<()> {
        if self.n() != 2 {
            return Err(SpecError::Unsupported("pointwise evaluation is implemented for n = 2".into()));
        }
        Ok(())
    }

    /// Basis function Y_{k,j}(θ) on a circle of radius `radius` (= sn(ρ)) and its
    /// first two θ-derivatives.
    pub fn basis(radius: f64, degree: usize, index: usize, theta: f64) -> [f64; 3] {
        if degree == 0 {
            return [1.0 / (2.0 * PI * radius).sqrt(), 0.0, 0.0];
        }
        let c = 1.0 / (PI * radius).sqrt();
        let k = degree as f64;
        let (s, co) = (k * theta).sin_cos();
        if index == 0 {
            [c * co, -c * k * s, -c * k * k * co]
        } else {
            [c * s, c * k * co, -c * k * k * s]
        }
    }

    /// ξ(θ), ξ'(θ), ξ''(θ) for n = 2.
    pub fn eval3(&self, theta: f64) -> Result<[f64; 3]> {
        self.check_circle()?;
        let mut out = [0.0; 3];
        let radius = self.boundary_radius();
        for (&(k, j), &a) in &self.coeffs {
            let b = Self::basis(radius, k, j, theta);
            for i in 0..3 {
                out[i] += a * b[i];
            }
        }
        Ok(out)
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        Ok(self.eval3(theta)?[0])
    }

    /// Projects a function of θ on ∂B_ρ (n = 2) onto degrees ≤ k_max using `samples`
    /// trapezoid nodes (spectrally accurate for smooth periodic data).
    pub fn from_function<F: Fn(f64) -> f64>(space: SpaceForm, rho: f64, f: F, k_max: usize, samples: usize) -> Self {
        let dt = 2.0 * PI / samples as f64;
        let vals: Vec<f64> = (0..samples).map(|i| f(i as f64 * dt)).collect();
        let arc = space.sn(rho);
        let mut out = Self::in_space(space, rho);
        for k in 0..=k_max {
            for j in 0..(if k == 0 { 1 } else { 2 }) {
                let a: f64 =
                    vals.iter().enumerate().map(|(i, v)| v * Self::basis(arc, k, j, i as f64 * dt)[0]).sum::<f64>() * dt * arc;
                out.set(k, j, a);
            }
        }
        // drop coefficients at the rounding level of the projection
        let peak = out.coeffs.values().fold(0.0f64, |m, a| m.max(a.abs()));
        out.coeffs.retain(|_, a| a.abs() > 1e-14 * peak);
        out
    }
}

/// Both evaluations of δ²λ₁(B_ρ)[ξ, ξ].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariation {
    pub convention: EtaConvention,
    /// 2Σ η a²
    pub mode_sum: f64,
    /// 2∫(|∇w|² − λw²) + cH|u'|²∫ξ² with the convention's curvature weight c
    pub quadrature: f64,
    /// the same with c = 1
    pub printed_quadrature: f64,
    pub rel_mismatch: f64,
}

fn require_mean_zero(xi: &BoundaryPerturbation) -> Result<()> {
    if xi.mean_coeff().abs() > 1e-14 {
        return domain("ξ must have mean zero (a₀ = 0)");
    }
    Ok(())
}

pub fn second_variation(n: usize, rho: f64, xi: &BoundaryPerturbation) -> Result<SecondVariation> {
    second_variation_with(n, rho, xi, calibrated_convention()?)
}

pub fn second_variation_with(n: usize, rho: f64, xi: &BoundaryPerturbation, c: EtaConvention) -> Result<SecondVariation> {
    require_mean_zero(xi)?;
    if xi.coeffs.is_empty() {
        return Ok(SecondVariation { convention: c, mode_sum: 0.0, quadrature: 0.0, printed_quadrature: 0.0, rel_mismatch: 0.0 });
    }
    let sc = CapScalars::new(n, rho)?;
    let hu2 = sc.mean_curvature * sc.u_prime * sc.u_prime;
    let mut by_degree: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(k, _), &a) in &xi.coeffs {
        *by_degree.entry(k).or_default() += a * a;
    }
    let (mut mode_sum, mut energy, mut l2) = (0.0, 0.0, 0.0);
    for (&k, &a2) in &by_degree {
        let g = sc.profile(k)?;
        mode_sum += 2.0 * c.eta(g.boundary_slope(), sc.u_prime, sc.mean_curvature) * a2;
        energy += 2.0 * energy_integral(&sc, &g)? * a2;
        l2 += a2;
    }
    let quadrature = energy + c.curvature_weight() * hu2 * l2;
    let printed_quadrature = energy + hu2 * l2;
    let rel_mismatch = ((mode_sum - quadrature) / quadrature.abs().max(1e-300)).abs();
    Ok(SecondVariation { convention: c, mode_sum, quadrature, printed_quadrature, rel_mismatch })
}

/// w_ξ = Σ a Y g as a mode sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WField {
    pub scalars: CapScalars,
    pub modes: Vec<((usize, usize), f64, ModeProfile)>,
}

impl WField {
    /// ‖w_ξ‖_{L²(B_ρ)}.
    pub fn l2_norm(&self) -> f64 {
        self.modes.iter().map(|(_, a, g)| a * a * mass_integral(&self.scalars, g)).sum::<f64>().sqrt()
    }

    /// w(φ, θ) on S².
    pub fn eval(&self, phi: f64, theta: f64) -> Result<f64> {
        if self.scalars.n != 2 {
            return Err(SpecError::Unsupported("pointwise evaluation is implemented for S²".into()));
        }
        Ok(self
            .modes
            .iter()
            .map(|((k, j), a, g)| {
                a * g.interpolant().eval(phi) * BoundaryPerturbation::basis(self.scalars.rho.sin(), *k, *j, theta)[0]
            })
            .sum())
    }

    /// Max over modes and interior profile nodes of the radial-equation residual,
    /// with g'' from centered differences of the stored slopes, relative to the
    /// largest term.
    pub fn radial_residual(&self) -> f64 {
        let space = SpaceForm::sphere(self.scalars.n);
        let m1 = self.scalars.n as f64 - 1.0;
        let mut worst = 0.0f64;
        for (_, _, g) in &self.modes {
            let x = &g.grid.nodes;
            for i in 1..x.len() - 1 {
                let g2 = (g.slopes[i + 1] - g.slopes[i - 1]) / (x[i + 1] - x[i - 1]);
                let s = space.sn(x[i]);
                let t1 = m1 * space.ct(x[i]) * g.slopes[i];
                let t2 = (self.scalars.lambda - g.mu / (s * s)) * g.values[i];
                let scale = g2.abs().max(t1.abs()).max(t2.abs());
                worst = worst.max((g2 + t1 + t2).abs() / scale);
            }
        }
        worst
    }
}

pub fn solve_w_xi(n: usize, rho: f64, xi: &BoundaryPerturbation) -> Result<WField> {
    require_mean_zero(xi)?;
    let sc = CapScalars::new(n, rho)?;
    let mut cache: BTreeMap<usize, ModeProfile> = BTreeMap::new();
    let mut modes = Vec::new();
    for (&(k, j), &a) in &xi.coeffs {
        if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(k) {
            e.insert(sc.profile(k)?);
        }
        modes.push(((k, j), a, cache[&k].clone()));
    }
    Ok(WField { scalars: sc, modes })
}

/// max over degrees 1..=k_max of ‖w‖/‖ξ‖ for single modes; the constant of the
/// L² bound w ↦ ξ (diagonal in the harmonic basis).
pub fn l2_bound_constant(n: usize, rho: f64, k_max: usize) -> Result<f64> {
    let sc = CapScalars::new(n, rho)?;
    let mut c = 0.0f64;
    for k in 1..=k_max {
        c = c.max(mass_integral(&sc, &sc.profile(k)?).sqrt());
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        assert_eq!(ModeIndex::new(2, 1).multiplicity, 2);
        assert_eq!(ModeIndex::new(3, 1).multiplicity, 3);
        assert_eq!(ModeIndex::new(3, 2).multiplicity, 5);
        assert_eq!(ModeIndex::new(4, 2).multiplicity, 9);
        assert_eq!(ModeIndex::new(3, 2).mu, 6.0);
        assert_eq!(ModeIndex::new(4, 1).mu, 3.0);
    }

    #[test]
    fn calibration_selects_shape_hessian() {
        let cal = calibration().unwrap();
        assert_eq!(cal.selected, EtaConvention::ShapeHessian);
        let printed = cal.scores.iter().find(|s| s.convention == EtaConvention::AsPrinted).unwrap();
        assert!(!printed.accepted);
    }

    #[test]
    fn hemisphere_degree_one_vanishes() {
        let e1 = dtn_eigenvalue(2, PI / 2.0, 1).unwrap();
        let e2 = dtn_eigenvalue(2, PI / 2.0, 2).unwrap();
        assert!(e1.abs() < 1e-9 && e2 > 0.0);
        assert!(dtn_eigenvalue(2, PI / 2.0, 0).is_err());
    }

    #[test]
    fn basis_is_orthonormal_on_circle() {
        let rho: f64 = 1.1;
        let n = 512;
        let dt = 2.0 * PI / n as f64;
        for (k, j) in [(0, 0), (1, 0), (1, 1), (3, 1)] {
            for (l, i) in [(0, 0), (1, 0), (1, 1), (3, 1)] {
                let s: f64 = (0..n)
                    .map(|q| {
                        let t = q as f64 * dt;
                        BoundaryPerturbation::basis(rho.sin(), k, j, t)[0] * BoundaryPerturbation::basis(rho.sin(), l, i, t)[0]
                    })
                    .sum::<f64>()
                    * dt
                    * rho.sin();
                let want = if (k, j) == (l, i) { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_recovers_coefficients() {
        let xi = BoundaryPerturbation::new(2, 1.0).with(2, 0, 0.3).with(1, 1, -0.1).with(0, 0, 0.05);
        let p = BoundaryPerturbation::from_function(SpaceForm::sphere(2), 1.0, |t| xi.eval(t).unwrap(), 6, 256);
        for (&(k, j), &a) in &xi.coeffs {
            assert!((p.coeff(k, j) - a).abs() < 1e-13);
        }
        assert!(p.coeff(3, 0).abs() < 1e-13);
    }
}
