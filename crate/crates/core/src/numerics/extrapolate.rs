/// Value at x = 0 of the polynomial interpolating (x_i, y_i) (Neville's scheme).
/// With three step sizes this is Richardson extrapolation removing the linear and
/// quadratic error terms.
pub fn polynomial_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (x[i], x[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}
