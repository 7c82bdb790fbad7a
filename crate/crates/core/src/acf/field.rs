use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, SpecError};

/// {u > 0} is detected as {u > POSITIVITY_REL · max u}.
pub const POSITIVITY_REL: f64 = 1e-12;

/// Sampling grid for ACF fields: uniform angles and log-spaced radii in [r_min, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfGrid {
    pub n_angle: usize,
    pub n_radius: usize,
    pub r_min: f64,
}

impl Default for AcfGrid {
    fn default() -> Self {
        Self { n_angle: 512, n_radius: 256, r_min: 2f64.powi(-10) }
    }
}

impl AcfGrid {
    pub fn new(n_angle: usize, n_radius: usize, r_min: f64) -> Result<Self> {
        if n_angle < 8 || n_radius < 4 {
            return domain("ACF grids need at least 8 angles and 4 radii");
        }
        if !(r_min > 0.0 && r_min < 1.0) {
            return domain(format!("smallest radius {r_min} outside (0, 1)"));
        }
        Ok(Self { n_angle, n_radius, r_min })
    }

    /// Twice the angular resolution and twice the radial intervals; the old radii are
    /// a subset of the new ones.
    pub fn refined(&self) -> Self {
        Self { n_angle: 2 * self.n_angle, n_radius: 2 * (self.n_radius - 1) + 1, r_min: self.r_min }
    }

    pub fn radii(&self) -> Vec<f64> {
        let m = (self.n_radius - 1) as f64;
        let l = self.r_min.ln();
        (0..self.n_radius).map(|k| if k + 1 == self.n_radius { 1.0 } else { (l * (1.0 - k as f64 / m)).exp() }).collect()
    }

    /// Full Fourier grid on the circle.
    pub fn circle_angles(&self) -> Vec<f64> {
        (0..self.n_angle).map(|j| 2.0 * PI * j as f64 / self.n_angle as f64).collect()
    }

    /// Polar angles on [0, π] including both poles.
    pub fn polar_angles(&self) -> Vec<f64> {
        let m = (self.n_angle - 1) as f64;
        (0..self.n_angle).map(|j| PI * j as f64 / m).collect()
    }

    pub fn angles(&self, dim: usize) -> Vec<f64> {
        if dim == 2 {
            self.circle_angles()
        } else {
            self.polar_angles()
        }
    }

    /// Squared angular step plus squared log-radial step: the scale of second-order
    /// discretization errors on this grid.
    pub fn resolution(&self, dim: usize) -> f64 {
        let h = if dim == 2 { 2.0 * PI / self.n_angle as f64 } else { PI / (self.n_angle - 1) as f64 };
        let d = -self.r_min.ln() / (self.n_radius - 1) as f64;
        h * h + d * d
    }
}

/// Nonnegative samples u(r, θ) on B_1 ⊂ R^dim: the full circle for dim = 2, polar
/// angles of an axisymmetric field for dim ≥ 3. Values are row-major by radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarField {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

impl PolarField {
    pub fn new(dim: usize, radii: Vec<f64>, angles: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return domain("fields live in dimension at least 2");
        }
        check_radii(&radii)?;
        check_angles(dim, &angles)?;
        if values.len() != radii.len() * angles.len() {
            return Err(SpecError::Validation(format!("{} samples for a {}×{} grid", values.len(), radii.len(), angles.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SpecError::Validation(format!("non-finite sample {v}")));
        }
        let peak = values.iter().fold(0.0f64, |a, &v| a.max(v));
        let noise = POSITIVITY_REL * peak;
        for (i, v) in values.iter_mut().enumerate() {
            if *v < -noise {
                let (k, j) = (i / angles.len(), i % angles.len());
                return Err(SpecError::Validation(format!("negative sample {} at r = {}, angle = {}", v, radii[k], angles[j])));
            }
            *v = v.max(0.0);
        }
        let mut radii = radii;
        *radii.last_mut().unwrap() = 1.0;
        let f = Self { dim, radii, angles, values };
        f.check_isolated()?;
        Ok(f)
    }

    /// Samples max(f(r, angle), 0) on `grid`.
    pub fn from_fn(dim: usize, grid: &AcfGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let radii = grid.radii();
        let angles = grid.angles(dim);
        let mut values = Vec::with_capacity(radii.len() * angles.len());
        for &r in &radii {
            for &a in &angles {
                values.push(f(r, a).max(0.0));
            }
        }
        Self::new(dim, radii, angles, values)
    }

    pub fn n_angle(&self) -> usize {
        self.angles.len()
    }

    pub fn n_radius(&self) -> usize {
        self.radii.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.n_angle();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.n_angle() + j]
    }

    pub fn periodic(&self) -> bool {
        self.dim == 2
    }

    pub fn angle_step(&self) -> f64 {
        if self.periodic() {
            2.0 * PI / self.n_angle() as f64
        } else {
            PI / (self.n_angle() - 1) as f64
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v))
    }

    pub fn threshold(&self) -> f64 {
        POSITIVITY_REL * self.max_value()
    }

    pub fn is_zero(&self) -> bool {
        self.max_value() == 0.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut f = self.clone();
        f.values.iter_mut().for_each(|v| *v *= c.abs());
        f
    }

    /// Index of a grid radius matching `r` to relative precision 1e-9.
    pub fn radius_index(&self, r: f64) -> Result<usize> {
        self.radii
            .iter()
            .position(|&x| ((x - r) / r).abs() < 1e-9)
            .ok_or_else(|| SpecError::Domain(format!("radius {r} is not a grid radius")))
    }

    /// Quadratic-in-log-r resolution of the grid: squared angular step plus the
    /// squared largest log-radial step.
    pub fn resolution(&self) -> f64 {
        let h = self.angle_step();
        let d = self.radii.windows(2).map(|w| (w[1] / w[0]).ln()).fold(0.0f64, f64::max);
        h * h + d * d
    }

    /// The rescaling u(s·x)/s restricted to B_1, on the radii r/s of the original grid
    /// inside (0, 1] plus the unit circle itself (interpolated linearly in log r for u/r).
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return domain(format!("rescaling factor {s} outside (0, 1]"));
        }
        let inside: Vec<usize> = (0..self.n_radius()).filter(|&k| self.radii[k] < s * (1.0 - 1e-12)).collect();
        if inside.len() < 3 {
            return domain(format!("grid does not resolve radius {s}"));
        }
        let n = self.n_angle();
        let mut radii: Vec<f64> = inside.iter().map(|&k| self.radii[k] / s).collect();
        let mut values = Vec::with_capacity((inside.len() + 1) * n);
        for &k in &inside {
            values.extend(self.row(k).iter().map(|v| v / s));
        }
        let top = *inside.last().unwrap() + 1;
        let (r0, r1) = (self.radii[top - 1], self.radii[top]);
        let t = (s / r0).ln() / (r1 / r0).ln();
        for j in 0..n {
            let (a, b) = (self.value(top - 1, j) / r0, self.value(top, j) / r1);
            values.push(a + t * (b - a));
        }
        radii.push(1.0);
        Self::new(self.dim, radii, self.angles.clone(), values)
    }

    fn check_isolated(&self) -> Result<()> {
        let thr = self.threshold();
        let (nr, na) = (self.n_radius(), self.n_angle());
        if nr < 2 || na < 3 {
            return Ok(());
        }
        for k in 0..nr {
            for j in 0..na {
                if self.value(k, j) <= thr {
                    continue;
                }
                let mut nb = Vec::with_capacity(4);
                if self.periodic() {
                    nb.push(self.value(k, (j + na - 1) % na));
                    nb.push(self.value(k, (j + 1) % na));
                } else {
                    if j > 0 {
                        nb.push(self.value(k, j - 1));
                    }
                    if j + 1 < na {
                        nb.push(self.value(k, j + 1));
                    }
                }
                if k > 0 {
                    nb.push(self.value(k - 1, j));
                }
                if k + 1 < nr {
                    nb.push(self.value(k + 1, j));
                }
                if nb.iter().all(|&v| v <= thr) {
                    return Err(SpecError::Validation(format!(
                        "isolated positive sample at r = {}, angle = {}",
                        self.radii[k], self.angles[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 4 {
        return Err(SpecError::Validation("a field needs at least 4 radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(SpecError::Validation("radii must be positive and strictly increasing".into()));
    }
    let top = *radii.last().unwrap();
    if (top - 1.0).abs() > 1e-12 {
        return Err(SpecError::Validation(format!("the radial grid must end at r = 1, not {top}")));
    }
    Ok(())
}

fn check_angles(dim: usize, angles: &[f64]) -> Result<()> {
    let n = angles.len();
    if n < 8 {
        return Err(SpecError::Validation("a field needs at least 8 angles".into()));
    }
    let (step, first, span) = if dim == 2 { (2.0 * PI / n as f64, angles[0], 2.0 * PI) } else { (PI / (n - 1) as f64, 0.0, PI) };
    if !(0.0..span).contains(&angles[0]) {
        return Err(SpecError::Validation(format!("first angle {} outside [0, {span})", angles[0])));
    }
    for (j, &a) in angles.iter().enumerate() {
        if (a - first - step * j as f64).abs() > 1e-9 * step.max(1.0) {
            let what = if dim == 2 { "uniform on the circle" } else { "uniform on [0, π] with both poles" };
            return Err(SpecError::Validation(format!("angle #{j} = {a}: angles must be {what}")));
        }
    }
    Ok(())
}

/// Two fields on a common grid with disjoint positivity sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub name: String,
    pub u1: PolarField,
    pub u2: PolarField,
    /// Whether the fields are declared subharmonic in their positivity sets; the
    /// deficit inequality is only asserted for subharmonic pairs.
    pub subharmonic: bool,
}

impl AdmissiblePair {
    pub fn new(name: impl Into<String>, u1: PolarField, u2: PolarField) -> Result<Self> {
        if u1.dim != u2.dim || u1.radii != u2.radii || u1.angles != u2.angles {
            return Err(SpecError::Validation("the two fields live on different grids".into()));
        }
        let (t1, t2) = (u1.threshold(), u2.threshold());
        let n = u1.n_angle();
        for (i, (a, b)) in u1.values.iter().zip(&u2.values).enumerate() {
            if *a > t1 && *b > t2 {
                return Err(SpecError::Validation(format!(
                    "supports overlap at r = {}, angle = {} (u1 = {a}, u2 = {b})",
                    u1.radii[i / n],
                    u1.angles[i % n]
                )));
            }
        }
        Ok(Self { name: name.into(), u1, u2, subharmonic: true })
    }

    pub fn not_subharmonic(mut self) -> Self {
        self.subharmonic = false;
        self
    }

    pub fn dim(&self) -> usize {
        self.u1.dim
    }

    pub fn radii(&self) -> &[f64] {
        &self.u1.radii
    }

    pub fn field(&self, i: usize) -> &PolarField {
        if i == 0 {
            &self.u1
        } else {
            &self.u2
        }
    }

    pub fn scaled(&self, c1: f64, c2: f64) -> Self {
        Self { name: self.name.clone(), u1: self.u1.scaled(c1), u2: self.u2.scaled(c2), subharmonic: self.subharmonic }
    }

    /// Rescaling of both fields. The unit circle of the result is interpolated between
    /// grid radii, which can smear the free boundary; there the smaller of two
    /// overlapping values is dropped.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        let (mut u1, mut u2) = (self.u1.rescaled(s)?, self.u2.rescaled(s)?);
        let (t1, t2) = (u1.threshold(), u2.threshold());
        let top = (u1.n_radius() - 1) * u1.n_angle();
        for (a, b) in u1.values[top..].iter_mut().zip(&mut u2.values[top..]) {
            if *a > t1 && *b > t2 {
                if *a >= *b {
                    *b = 0.0;
                } else {
                    *a = 0.0;
                }
            }
        }
        let mut p = Self::new(self.name.clone(), u1, u2)?;
        p.subharmonic = self.subharmonic;
        Ok(p)
    }
}
