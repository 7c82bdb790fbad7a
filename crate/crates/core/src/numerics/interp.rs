/// Piecewise cubic Hermite interpolant from values and slopes on increasing nodes.
#[derive(Debug, Clone)]
pub struct Hermite {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

impl Hermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == dy.len());
        Self { x, y, dy }
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Value and derivative at `t` (extrapolates the end cubic outside the node range).
    pub fn eval2(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.dy[i] * h, self.dy[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1;
        let dv =
            (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * d1;
        (v, dv / h)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval2(t).0
    }
}

/// Linear interpolation on increasing nodes, clamped at the ends.
pub fn lerp(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0];
    }
    if t >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|&xi| xi <= t) - 1;
    let s = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + s * (y[i + 1] - y[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let x: Vec<f64> = (0..5).map(|i| i as f64 * 0.3).collect();
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let h = Hermite::new(x.clone(), x.iter().map(|&t| f(t)).collect(), x.iter().map(|&t| df(t)).collect());
        for t in [0.05, 0.4, 0.77, 1.19] {
            let (v, d) = h.eval2(t);
            assert!((v - f(t)).abs() < 1e-13);
            assert!((d - df(t)).abs() < 1e-12);
        }
    }
}
