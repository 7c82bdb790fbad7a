//! Data on a single sphere ∂B_r: positivity arcs (or caps), tangential energy,
//! L² mass and radial derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::field::PolarField;
use crate::error::{domain, Result, SpecError};
use crate::spaceform::unit_sphere_area;

/// A maximal positivity arc with endpoints reconstructed from the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    /// Left endpoint; arcs crossing angle 0 start at a negative angle.
    pub start: f64,
    pub end: f64,
    pub length: f64,
    /// Piecewise-linear profile (angle, u) from `start` to `end`.
    #[serde(skip)]
    pub(crate) points: Vec<(f64, f64)>,
}

impl Arc {
    /// ∫ u² of the piecewise-linear profile.
    pub fn mass(&self) -> f64 {
        self.points.windows(2).map(|w| (w[0].1 * w[0].1 + w[0].1 * w[1].1 + w[1].1 * w[1].1) * (w[1].0 - w[0].0) / 3.0).sum()
    }

    /// ∫ u · sin(k π (θ − start)/L) · √(2/L) over the arc, exact for the
    /// piecewise-linear profile.
    pub fn sine_coefficient(&self, k: usize) -> f64 {
        let l = self.length;
        let w = k as f64 * PI / l;
        let anti = |p: f64, q: f64, t: f64| -(p + q * t) * (w * t).cos() / w + q * (w * t).sin() / (w * w);
        let mut s = 0.0;
        for seg in self.points.windows(2) {
            let (a, b) = (seg[0].0 - self.start, seg[1].0 - self.start);
            if b <= a {
                continue;
            }
            let q = (seg[1].1 - seg[0].1) / (b - a);
            let p = seg[0].1 - q * a;
            s += anti(p, q, b) - anti(p, q, a);
        }
        s * (2.0 / l).sqrt()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

/// Positivity arcs of a circle ∂B_r, with the explicit first Dirichlet eigenpair of
/// the longest arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDecomposition {
    pub r: f64,
    pub arcs: Vec<Arc>,
    pub longest: usize,
    /// θ(r): angle of the longest arc, whose length is r·θ(r).
    pub theta: f64,
    /// π²/(r²θ²)
    pub lambda1: f64,
    /// Second Dirichlet eigenvalue of the union of arcs.
    pub lambda2: f64,
    pub total_angle: f64,
    pub full_circle: bool,
}

impl ArcDecomposition {
    /// Y_{1,r}(θ) = √(2/(rθ_r)) sin(π(θ − start)/θ_r)⁺ on the longest arc, 0 elsewhere.
    pub fn eigenfunction(&self, angle: f64) -> f64 {
        let a = &self.arcs[self.longest];
        let t = (angle - a.start).rem_euclid(2.0 * PI);
        if t >= a.length {
            return 0.0;
        }
        (2.0 / (self.r * self.theta)).sqrt() * (PI * t / self.theta).sin().max(0.0)
    }
}

/// λ₁ of an arc of angle θ on the circle of radius r.
pub fn arc_eigenvalue(theta: f64, r: f64) -> f64 {
    PI * PI / (r * r * theta * theta)
}

/// Per-slice integrals in unit-sphere measure dσ (dθ on the circle).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Slice {
    /// ∫ u² dσ
    pub mass: f64,
    /// ∫ |∇_S u|² dσ with free-boundary reconstruction at arc ends
    pub tangential: f64,
    pub arcs: Vec<Arc>,
    pub full: bool,
}

/// Metric weight of the slice measure at polar angle φ (1 on the circle).
pub(crate) fn sphere_weight(dim: usize, phi: f64) -> f64 {
    if dim == 2 {
        1.0
    } else {
        unit_sphere_area(dim - 2) * phi.sin().powi(dim as i32 - 2)
    }
}

/// Quadrature weights on the angular nodes.
pub(crate) fn node_weights(field: &PolarField) -> Vec<f64> {
    let h = field.angle_step();
    let n = field.n_angle();
    (0..n)
        .map(|j| {
            let end = !field.periodic() && (j == 0 || j + 1 == n);
            let w = sphere_weight(field.dim, field.angles[j]) * h;
            if end {
                0.5 * w
            } else {
                w
            }
        })
        .collect()
}

/// Distance from an edge node to the reconstructed free boundary: linear
/// extrapolation of the inward slope, capped at one cell.
fn edge_distance(edge: f64, inner: Option<f64>, h: f64) -> f64 {
    match inner {
        Some(ui) if ui > edge => (edge * h / (ui - edge)).min(h),
        _ => h,
    }
}

pub(crate) fn slice(field: &PolarField, k: usize) -> Slice {
    let row = field.row(k);
    let thr = field.threshold();
    let weights = node_weights(field);
    let mass = row.iter().zip(&weights).map(|(u, w)| u * u * w).sum();
    let arcs = if field.periodic() { circle_arcs(row, thr, field) } else { polar_runs(row, thr, field) };
    let full = field.periodic() && arcs.len() == 1 && row.iter().all(|&u| u > thr);
    let dim = field.dim;
    let tangential = arcs
        .iter()
        .map(|a| {
            a.points
                .windows(2)
                .map(|w| {
                    let d = w[1].0 - w[0].0;
                    if d <= 0.0 {
                        return 0.0;
                    }
                    let du = w[1].1 - w[0].1;
                    du * du / d * sphere_weight(dim, 0.5 * (w[0].0 + w[1].0))
                })
                .sum::<f64>()
        })
        .sum();
    Slice { mass, tangential, arcs, full }
}

fn circle_arcs(row: &[f64], thr: f64, field: &PolarField) -> Vec<Arc> {
    let n = row.len();
    let h = field.angle_step();
    let theta0 = field.angles[0];
    let pos = |j: usize| row[j] > thr;
    let Some(zero) = (0..n).find(|&j| !pos(j)) else {
        // the whole circle: cut at the smallest sample
        let cut = (0..n).min_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        let start = theta0 + h * cut as f64;
        let mut points: Vec<(f64, f64)> = (0..n).map(|i| (start + h * i as f64, row[(cut + i) % n])).collect();
        points.push((start + 2.0 * PI, row[cut]));
        return vec![Arc { start, end: start + 2.0 * PI, length: 2.0 * PI, points }];
    };
    let mut arcs = Vec::new();
    let mut i = 1;
    while i <= n {
        let j = (zero + i) % n;
        if !pos(j) {
            i += 1;
            continue;
        }
        let first = zero + i;
        while i <= n && pos((zero + i) % n) {
            i += 1;
        }
        let last = zero + i - 1;
        let at = |m: usize| row[m % n];
        let angle = |m: usize| theta0 + h * m as f64;
        let inner_l = if last > first { Some(at(first + 1)) } else { None };
        let inner_r = if last > first { Some(at(last - 1)) } else { None };
        let start = angle(first) - edge_distance(at(first), inner_l, h);
        let end = angle(last) + edge_distance(at(last), inner_r, h);
        let mut points = vec![(start, 0.0)];
        points.extend((first..=last).map(|m| (angle(m), at(m))));
        points.push((end, 0.0));
        // report arcs with start in [0, 2π)
        let shift = (start / (2.0 * PI)).floor() * 2.0 * PI;
        points.iter_mut().for_each(|p| p.0 -= shift);
        arcs.push(Arc { start: start - shift, end: end - shift, length: end - start, points });
    }
    arcs
}

fn polar_runs(row: &[f64], thr: f64, field: &PolarField) -> Vec<Arc> {
    let n = row.len();
    let h = field.angle_step();
    let mut arcs = Vec::new();
    let mut j = 0;
    while j < n {
        if row[j] <= thr {
            j += 1;
            continue;
        }
        let first = j;
        while j < n && row[j] > thr {
            j += 1;
        }
        let last = j - 1;
        let angle = |m: usize| h * m as f64;
        let mut points = Vec::new();
        let start = if first == 0 {
            0.0
        } else {
            let s = angle(first) - edge_distance(row[first], (last > first).then(|| row[first + 1]), h);
            points.push((s, 0.0));
            s
        };
        points.extend((first..=last).map(|m| (angle(m), row[m])));
        let end = if last + 1 == n {
            PI
        } else {
            let e = angle(last) + edge_distance(row[last], (last > first).then(|| row[last - 1]), h);
            points.push((e, 0.0));
            e
        };
        arcs.push(Arc { start, end, length: end - start, points });
    }
    arcs
}

/// Arc decomposition of the circle of radius `radii[k]` (dim = 2).
pub(crate) fn decompose(field: &PolarField, k: usize, s: &Slice) -> Option<ArcDecomposition> {
    if s.arcs.is_empty() {
        return None;
    }
    let r = field.radii[k];
    let longest = (0..s.arcs.len()).max_by(|&a, &b| s.arcs[a].length.total_cmp(&s.arcs[b].length).then(b.cmp(&a))).unwrap();
    let theta = s.arcs[longest].length.min(2.0 * PI);
    let lambda1 = arc_eigenvalue(theta, r);
    let second = s
        .arcs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != longest)
        .map(|(_, a)| arc_eigenvalue(a.length, r))
        .fold(f64::INFINITY, f64::min);
    Some(ArcDecomposition {
        r,
        arcs: s.arcs.clone(),
        longest,
        theta,
        lambda1,
        lambda2: (4.0 * lambda1).min(second),
        total_angle: s.arcs.iter().map(|a| a.length).sum::<f64>().min(2.0 * PI),
        full_circle: s.full,
    })
}

/// Positivity arcs of a planar field on the grid circle of radius r.
pub fn arc_decomposition(field: &PolarField, r: f64) -> Result<ArcDecomposition> {
    if field.dim != 2 {
        return domain(format!("arc decompositions are planar, field has dimension {}", field.dim));
    }
    let k = field.radius_index(r)?;
    decompose(field, k, &slice(field, k)).ok_or_else(|| SpecError::Domain(format!("empty positivity set on the circle r = {r}")))
}

/// ∂_r u at node (k, j): zero off the support; centered differences of log u in
/// log r where both radial neighbours are positive; one-sided differences next to
/// the free boundary and at the ends of the grid.
pub(crate) fn radial_derivative(field: &PolarField, k: usize, j: usize, thr: f64) -> f64 {
    let u = field.value(k, j);
    if u <= thr {
        return 0.0;
    }
    let nr = field.n_radius();
    let r = &field.radii;
    let x = |m: usize| r[m].ln();
    let v = |m: usize| field.value(m, j);
    let ok = |m: usize| v(m) > thr;
    let lo = (k > 0).then(|| k - 1);
    let hi = (k + 1 < nr).then(|| k + 1);
    match (lo, hi) {
        (Some(a), Some(b)) if ok(a) && ok(b) => {
            let (h1, h2) = (x(k) - x(a), x(b) - x(k));
            let d = -h2 / (h1 * (h1 + h2)) * v(a).ln() + (h2 - h1) / (h1 * h2) * u.ln() + h1 / (h2 * (h1 + h2)) * v(b).ln();
            u / r[k] * d
        }
        (None, Some(b)) if ok(b) && b + 1 < nr && ok(b + 1) => one_sided(u, v(b), v(b + 1), x(k), x(b), x(b + 1)) * u / r[k],
        (Some(a), None) if ok(a) && a > 0 && ok(a - 1) => one_sided(u, v(a), v(a - 1), x(k), x(a), x(a - 1)) * u / r[k],
        (Some(a), _) if ok(a) => (u - v(a)) / (r[k] - r[a]),
        (_, Some(b)) if ok(b) => (v(b) - u) / (r[b] - r[k]),
        (Some(a), _) => (u - v(a)) / (r[k] - r[a]),
        _ => 0.0,
    }
}

/// Second-order one-sided derivative of log u in log r at x0.
fn one_sided(u0: f64, u1: f64, u2: f64, x0: f64, x1: f64, x2: f64) -> f64 {
    let (a, b) = (x1 - x0, x2 - x0);
    let (y0, y1, y2) = (u0.ln(), u1.ln(), u2.ln());
    // derivative at x0 of the quadratic through the three points
    -(a + b) / (a * b) * y0 + b / (a * (b - a)) * y1 - a / (b * (b - a)) * y2
}

/// ∫ (∂_r u)² dσ on the slice k, and the nodal derivatives.
pub(crate) fn radial_slice(field: &PolarField, k: usize, weights: &[f64]) -> (f64, Vec<f64>) {
    let thr = field.threshold();
    let d: Vec<f64> = (0..field.n_angle()).map(|j| radial_derivative(field, k, j, thr)).collect();
    let s = d.iter().zip(weights).map(|(d, w)| d * d * w).sum();
    (s, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acf::field::AcfGrid;

    fn circle(f: impl Fn(f64, f64) -> f64) -> PolarField {
        PolarField::from_fn(2, &AcfGrid::new(512, 16, 0.25).unwrap(), f).unwrap()
    }

    #[test]
    fn semicircle_has_unit_eigenvalue() {
        let f = circle(|r, t| r * t.sin());
        let k = f.n_radius() - 1;
        let s = slice(&f, k);
        let d = decompose(&f, k, &s).unwrap();
        assert_eq!(d.arcs.len(), 1);
        assert!((d.theta - PI).abs() < 1e-6);
        assert!((d.lambda1 - 1.0).abs() < 1e-6);
        assert!((d.lambda2 - 4.0).abs() < 1e-5);
    }

    #[test]
    fn rotated_arc_endpoints_are_reconstructed() {
        let f = circle(|r, t| r * (t - 0.3).sin());
        let k = f.n_radius() - 1;
        let d = decompose(&f, k, &slice(&f, k)).unwrap();
        let a = &d.arcs[d.longest];
        assert!((a.start - 0.3).abs() < 1e-5, "{}", a.start);
        assert!((a.length - PI).abs() < 1e-5);
        // an arc straddling θ = 0
        let g = circle(|r, t| r * (t + 1.0).sin());
        let d = decompose(&g, k, &slice(&g, k)).unwrap();
        assert!((d.arcs[d.longest].start - (2.0 * PI - 1.0)).abs() < 1e-5);
        assert!((d.eigenfunction(PI / 2.0 - 1.0) - (2.0 / PI).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn tangential_energy_of_sine() {
        let f = circle(|_, t| (t - 0.123).sin());
        let s = slice(&f, 0);
        assert!((s.tangential - PI / 2.0).abs() < 1e-4, "{}", s.tangential);
        assert!((s.mass - PI / 2.0).abs() < 1e-6);
        assert!((s.arcs[0].mass() - PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn sine_coefficients_of_first_mode() {
        let f = circle(|_, t| t.sin());
        let s = slice(&f, 0);
        let a = &s.arcs[0];
        assert!((a.sine_coefficient(1) - (PI / 2.0).sqrt()).abs() < 1e-4);
        assert!(a.sine_coefficient(2).abs() < 1e-6);
        assert!(a.sine_coefficient(3).abs() < 1e-6);
    }

    #[test]
    fn radial_derivative_of_power() {
        let f = circle(|r, t| r.powf(1.7) * t.sin());
        let thr = f.threshold();
        for k in [0, 5, f.n_radius() - 1] {
            let r = f.radii[k];
            let d = radial_derivative(&f, k, 100, thr);
            let exact = 1.7 * r.powf(0.7) * f.angles[100].sin();
            assert!((d - exact).abs() < 1e-12 * exact.abs().max(1.0), "k={k}");
        }
    }
}
