use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

/// Fixed 12-point Gauss-Legendre rule on [a, b].
pub fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// Panel value with its two-halves refinement and the difference as error estimate.
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err).then(other.a.total_cmp(&self.a))
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, coarse: f64) -> Panel {
    let m = 0.5 * (a + b);
    let value = gl_panel(f, a, m) + gl_panel(f, m, b);
    Panel { a, b, value, err: (value - coarse).abs() }
}

/// Maximum number of panels of the globally adaptive rule.
const MAX_PANELS: usize = 4000;

/// Globally adaptive Gauss-Legendre quadrature: repeatedly bisects the panel with
/// the largest error estimate until the summed estimate is below `tol` (or below
/// the rounding level of the integral), with a bounded number of panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(panel(&f, a, b, gl_panel(&f, a, b)));
    loop {
        let (total, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        if err <= tol.max(1e-15 * f64::abs(total)) || heap.len() >= MAX_PANELS {
            // sum in position order so the result does not depend on heap layout
            let mut parts: Vec<Panel> = heap.into_vec();
            parts.sort_by(|x, y| x.a.total_cmp(&y.a));
            return parts.iter().map(|p| p.value).sum();
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        let left = gl_panel(&f, worst.a, m);
        let right = gl_panel(&f, m, worst.b);
        heap.push(panel(&f, worst.a, m, left));
        heap.push(panel(&f, m, worst.b, right));
    }
}

/// Adaptive quadrature over consecutive breakpoints (kinks of the integrand).
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> f64 {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    breaks.windows(2).map(|w| integrate(&f, w[0], w[1], tol / pieces)).sum()
}

/// Composite Simpson weights for equispaced nodes; falls back to the trapezoid
/// rule on the last panel when the interval count is odd.
pub fn simpson_weights(n_nodes: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n_nodes];
    if n_nodes < 2 {
        return w;
    }
    let intervals = n_nodes - 1;
    let even = intervals - intervals % 2;
    for i in (0..even).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if even < intervals {
        w[n_nodes - 2] += 0.5 * h;
        w[n_nodes - 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let n = 11;
        let h = 0.1;
        let w = simpson_weights(n, h);
        let s: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
        assert!((s - 0.25).abs() < 1e-14);
    }
}
