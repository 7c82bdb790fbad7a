//! Ball energies, the ACF functional J and its logarithmic derivative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{AdmissiblePair, PolarField};
use super::slice::{node_weights, radial_slice, slice, Slice};
use crate::error::{domain, Result};

/// Logarithmic mean (y − x)/ln(y/x): the exact cell integral of a power law in
/// log r, falling back to the arithmetic mean when either end vanishes.
pub(crate) fn log_mean(x: f64, y: f64) -> f64 {
    if !(x > 0.0 && y > 0.0) {
        return 0.5 * (x + y);
    }
    let q = y / x;
    if (q - 1.0).abs() < 1e-8 {
        return 0.5 * (x + y);
    }
    (y - x) / q.ln()
}

/// Radial profile data of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub radii: Vec<f64>,
    /// ∫_{B_r} |∇u|² |x|^{m+1−n}, i.e. ∫₀^r s^m ∫|∇u|² dσ ds
    pub energy: Vec<f64>,
    /// ∫ u² dσ on ∂B_r / r^{n−1}
    pub mass: Vec<f64>,
    /// ∫ |∇_S u|² dσ (unit-sphere tangential energy)
    pub tangential: Vec<f64>,
    /// ∫ (∂_r u)² dσ
    pub radial: Vec<f64>,
    pub weight_exponent: i32,
}

impl EnergyProfile {
    /// ∫ |∇u|² dσ on the slice of radius radii[k].
    pub fn slice_energy(&self, k: usize) -> f64 {
        let r = self.radii[k];
        self.radial[k] + self.tangential[k] / (r * r)
    }
}

/// Per-radius slices and nodal radial derivatives of a field.
pub(crate) struct FieldSlices {
    pub slices: Vec<Slice>,
    pub radial: Vec<f64>,
    pub dr: Vec<Vec<f64>>,
}

pub(crate) fn field_slices(field: &PolarField) -> FieldSlices {
    let weights = node_weights(field);
    let data: Vec<(Slice, f64, Vec<f64>)> = (0..field.n_radius())
        .into_par_iter()
        .map(|k| {
            let (s, d) = radial_slice(field, k, &weights);
            (slice(field, k), s, d)
        })
        .collect();
    let mut slices = Vec::with_capacity(data.len());
    let mut radial = Vec::with_capacity(data.len());
    let mut dr = Vec::with_capacity(data.len());
    for (s, r, d) in data {
        slices.push(s);
        radial.push(r);
        dr.push(d);
    }
    FieldSlices { slices, radial, dr }
}

/// Cumulative ball integrals with weight s^m: power-law-exact cell rules in r at
/// fixed angle for the radial part, logarithmic means for the tangential part, and a
/// homogeneous core on B_{r_0}.
pub(crate) fn energy_from_slices(field: &PolarField, fs: &FieldSlices, m: i32) -> EnergyProfile {
    let r = &field.radii;
    let nr = r.len();
    let weights = node_weights(field);
    let thr = field.threshold();
    let mass: Vec<f64> = fs.slices.iter().map(|s| s.mass).collect();
    let tangential: Vec<f64> = fs.slices.iter().map(|s| s.tangential).collect();
    let mut energy = vec![0.0; nr];
    let alpha0 = if mass[0] > 0.0 && mass[1] > 0.0 { 0.5 * (mass[1] / mass[0]).ln() / (r[1] / r[0]).ln() } else { 1.0 };
    let b0 = fs.radial[0] + tangential[0] / (r[0] * r[0]);
    let p = (2.0 * alpha0 + m as f64 - 1.0).max(0.1);
    energy[0] = r[0].powi(m + 1) * b0 / p;
    let mf = m as f64;
    for k in 0..nr - 1 {
        let (r0, r1) = (r[k], r[k + 1]);
        let dl = (r1 / r0).ln();
        let mut radial = 0.0;
        for (j, w) in weights.iter().enumerate() {
            let (u0, u1) = (field.value(k, j), field.value(k + 1, j));
            if u0 <= thr && u1 <= thr {
                continue;
            }
            let cell = if u0 > thr && u1 > thr {
                let a = (u1 / u0).ln() / dl;
                dl * log_mean(a * a * u0 * u0 * r0.powi(m - 1), a * a * u1 * u1 * r1.powi(m - 1))
            } else {
                let s = (u1 - u0) / (r1 - r0);
                s * s * (r1.powi(m + 1) - r0.powi(m + 1)) / (mf + 1.0)
            };
            radial += w * cell;
        }
        let tang = dl * log_mean(tangential[k] * r0.powi(m - 1), tangential[k + 1] * r1.powi(m - 1));
        energy[k + 1] = energy[k] + radial + tang;
    }
    EnergyProfile { radii: r.clone(), energy, mass, tangential, radial: fs.radial.clone(), weight_exponent: m }
}

/// Energy profile with weight s^m (m = 1 gives the ACF weight |x|^{2−n}).
pub fn energy_profile(field: &PolarField, m: i32) -> EnergyProfile {
    energy_from_slices(field, &field_slices(field), m)
}

/// ∫_{B_r} u² on every grid radius (same cell rules as the energies).
pub fn ball_mass(field: &PolarField, slices: &[f64]) -> Vec<f64> {
    let r = &field.radii;
    let n = field.dim as i32;
    let mut out = vec![0.0; r.len()];
    let alpha0 = if slices[0] > 0.0 && slices[1] > 0.0 { 0.5 * (slices[1] / slices[0]).ln() / (r[1] / r[0]).ln() } else { 1.0 };
    out[0] = r[0].powi(n) * slices[0] / (2.0 * alpha0 + n as f64).max(0.1);
    for k in 0..r.len() - 1 {
        let dl = (r[k + 1] / r[k]).ln();
        out[k + 1] = out[k] + dl * log_mean(slices[k] * r[k].powi(n), slices[k + 1] * r[k + 1].powi(n));
    }
    out
}

/// J(r), its log-derivative by central differences in log r and by the boundary
/// integrals, on every grid radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfProfile {
    pub radii: Vec<f64>,
    pub j: Vec<f64>,
    pub energy: [Vec<f64>; 2],
    /// r·E_i'(r)/E_i(r) from the slice integrals: the boundary-integral form of each
    /// log-derivative term, 2 for linear fields.
    pub boundary_ratio: [Vec<f64>; 2],
    /// log J' by central differences (NaN at the two ends or where J = 0).
    pub log_j_prime: Vec<f64>,
    /// log J' assembled from the boundary integrals.
    pub log_j_prime_boundary: Vec<f64>,
}

pub(crate) fn profile_from(pair: &AdmissiblePair, e: [&EnergyProfile; 2]) -> AcfProfile {
    let radii = pair.radii().to_vec();
    let nr = radii.len();
    let j: Vec<f64> = (0..nr).map(|k| e[0].energy[k] * e[1].energy[k] / radii[k].powi(4)).collect();
    let ratio = |p: &EnergyProfile| -> Vec<f64> {
        (0..nr)
            .map(|k| {
                if p.energy[k] > 0.0 {
                    radii[k].powi(p.weight_exponent + 1) * p.slice_energy(k) / p.energy[k]
                } else {
                    f64::NAN
                }
            })
            .collect()
    };
    let br = [ratio(e[0]), ratio(e[1])];
    let mut cd = vec![f64::NAN; nr];
    for k in 1..nr - 1 {
        if j[k - 1] > 0.0 && j[k] > 0.0 && j[k + 1] > 0.0 {
            let x = |m: usize| radii[m].ln();
            let (h1, h2) = (x(k) - x(k - 1), x(k + 1) - x(k));
            let d = -h2 / (h1 * (h1 + h2)) * j[k - 1].ln()
                + (h2 - h1) / (h1 * h2) * j[k].ln()
                + h1 / (h2 * (h1 + h2)) * j[k + 1].ln();
            cd[k] = d / radii[k];
        }
    }
    let bi = (0..nr).map(|k| (br[0][k] + br[1][k] - 4.0) / radii[k]).collect();
    AcfProfile {
        radii,
        j,
        energy: [e[0].energy.clone(), e[1].energy.clone()],
        boundary_ratio: br,
        log_j_prime: cd,
        log_j_prime_boundary: bi,
    }
}

pub fn acf_profile(pair: &AdmissiblePair) -> AcfProfile {
    let e1 = energy_profile(&pair.u1, 1);
    let e2 = energy_profile(&pair.u2, 1);
    profile_from(pair, [&e1, &e2])
}

impl AcfProfile {
    /// J at an arbitrary radius in [r_0, 1], interpolating log J linearly in log r.
    pub fn at(&self, r: f64) -> Result<f64> {
        let (lo, hi) = (self.radii[0], *self.radii.last().unwrap());
        if !(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12)) {
            return domain(format!("radius {r} outside the grid range [{lo}, {hi}]"));
        }
        let r = r.clamp(lo, hi);
        let i = self.radii.partition_point(|&x| x <= r).clamp(1, self.radii.len() - 1) - 1;
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let (j0, j1) = (self.j[i], self.j[i + 1]);
        let t = (r / r0).ln() / (r1 / r0).ln();
        Ok(if j0 > 0.0 && j1 > 0.0 { (j0.ln() + t * (j1 / j0).ln()).exp() } else { j0 + t * (j1 - j0) })
    }

    /// Largest drop max_{r₁ ≤ r₂} (J(r₁) − J(r₂)) over the grid, zero for monotone J.
    pub fn monotonicity_violation(&self) -> f64 {
        let mut peak = f64::NEG_INFINITY;
        let mut worst = 0.0f64;
        for &v in &self.j {
            peak = peak.max(v);
            worst = worst.max(peak - v);
        }
        worst
    }
}

/// J(r) for a pair at a radius within the grid range.
#[allow(non_snake_case)]
pub fn acf_J(pair: &AdmissiblePair, r: f64) -> Result<f64> {
    acf_profile(pair).at(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acf::field::AcfGrid;
    use std::f64::consts::PI;

    #[test]
    fn log_mean_limits() {
        assert_eq!(log_mean(0.0, 2.0), 1.0);
        assert!((log_mean(1.0, 1.0 + 1e-10) - 1.0).abs() < 1e-9);
        assert!((log_mean(1.0, std::f64::consts::E) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn energy_of_power_field_is_exact_in_r() {
        let g = AcfGrid::new(256, 64, 2f64.powi(-8)).unwrap();
        let a: f64 = 1.3;
        let f = PolarField::from_fn(2, &g, |r, t| r.powf(a) * t.sin()).unwrap();
        let e = energy_profile(&f, 1);
        let h = 2.0 * PI / 256.0;
        // tangential energy of the sampled sine: (2 sin(h/2)/h)² · π/2
        let sinc = (2.0 * (h / 2.0).sin() / h).powi(2);
        for k in [0, 10, 63] {
            let r = f.radii[k];
            let exact = r.powf(2.0 * a) * (a * a + sinc) * PI / 2.0 / (2.0 * a);
            assert!((e.energy[k] / exact - 1.0).abs() < 1e-9, "k={k}: {} vs {exact}", e.energy[k]);
        }
        let m = ball_mass(&f, &e.mass);
        assert!((m[63] - PI / 2.0 / (2.0 * a + 2.0)).abs() < 1e-9);
    }
}
