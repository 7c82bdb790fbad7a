use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, SpecError};

/// Series-truncation target for the tail bound.
pub const SERIES_TOL: f64 = 1e-14;
const MAX_TERMS: usize = 400_000;

/// a_{k+1}/a_k for the cap eigenfunction series of S^m about t = 1.
pub fn recursion_ratio(m: usize, lambda: f64, k: usize) -> f64 {
    let (k, m) = (k as f64, m as f64);
    (k * k + (m - 1.0) * k - lambda) / ((k + 1.0) * (2.0 * k + m))
}

/// Coefficients a_0..a_K of f_λ(t) = Σ a_k (1−t)^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub lambda: f64,
    pub m: usize,
    pub truncation: usize,
    pub coefficients: Vec<f64>,
}

impl SeriesSolution {
    pub fn new(m: usize, lambda: f64, truncation: usize) -> Self {
        let mut coefficients = Vec::with_capacity(truncation + 1);
        let mut a = 1.0;
        coefficients.push(a);
        for k in 0..truncation {
            a *= recursion_ratio(m, lambda, k);
            coefficients.push(a);
        }
        Self { lambda, m, truncation, coefficients }
    }
}

/// Partial sum with its t-derivative and a rigorous bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval {
    pub value: f64,
    pub derivative: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Geometric ratio bound q with |a_{k+1}| x^{k+1} ≤ q |a_k| x^k for all k ≥ K.
fn tail_ratio(m: usize, lambda: f64, k: usize, x: f64) -> Option<f64> {
    let kf = k as f64;
    // the ratio bound only holds once the recursion numerator is positive
    if k == 0 || kf * kf + (m as f64 - 1.0) * kf <= lambda {
        return None;
    }
    let q = x * (0.5 + (m as f64 - 4.0).max(0.0) / (4.0 * kf) + lambda.abs() / (2.0 * kf * kf));
    (q < 1.0).then_some(q)
}

/// Bounds (value tail, derivative tail) for the series after the term |a_K| x^K.
fn tail_bounds(m: usize, lambda: f64, k: usize, term: f64, x: f64) -> (f64, f64) {
    // a vanishing coefficient terminates the recursion
    if term == 0.0 {
        return (0.0, 0.0);
    }
    match tail_ratio(m, lambda, k, x) {
        None => (f64::INFINITY, f64::INFINITY),
        Some(q) => {
            let t = term.abs();
            let kf = k as f64;
            (t * q / (1.0 - q), t / x * (kf * q / (1.0 - q) + q / ((1.0 - q) * (1.0 - q))))
        }
    }
}

fn check_t(t: f64) -> Result<f64> {
    let x = 1.0 - t;
    if !(t.is_finite() && x.abs() < 2.0) {
        return domain(format!("t = {t} outside the convergence interval (−1, 3)"));
    }
    Ok(x)
}

/// f_λ(t) truncated at K terms, with the tail bound of the remainder.
pub fn legendre_series_eval(m: usize, lambda: f64, t: f64, k_max: usize) -> Result<SeriesEval> {
    let x = check_t(t)?;
    if k_max < 1 || m < 1 {
        return domain("truncation K and dimension m must be at least 1");
    }
    let (mut a, mut xp) = (1.0, 1.0);
    let (mut value, mut deriv) = (1.0, 0.0);
    for k in 0..k_max {
        let kn = k + 1;
        a *= recursion_ratio(m, lambda, k);
        // derivative term uses x^{k}, value term x^{k+1}
        deriv -= kn as f64 * a * xp;
        xp *= x;
        value += a * xp;
    }
    Ok(SeriesEval { value, derivative: deriv, tail_bound: tail_bounds(m, lambda, k_max, a * xp, x.abs()).0, terms: k_max })
}

/// f_λ(t) summed until the tail bound drops below 1e−14.
pub fn legendre_series_auto(m: usize, lambda: f64, t: f64) -> Result<SeriesEval> {
    let x = check_t(t)?;
    if x == 0.0 {
        return Ok(SeriesEval { value: 1.0, derivative: -recursion_ratio(m, lambda, 0), tail_bound: 0.0, terms: 0 });
    }
    let (mut a, mut xp) = (1.0, 1.0);
    let (mut value, mut deriv) = (1.0, 0.0);
    for k in 0..MAX_TERMS {
        let kn = k + 1;
        a *= recursion_ratio(m, lambda, k);
        let dterm = kn as f64 * a * xp;
        deriv -= dterm;
        xp *= x;
        value += a * xp;
        if a == 0.0 {
            return Ok(SeriesEval { value, derivative: deriv, tail_bound: 0.0, terms: kn });
        }
        let (tb, dtb) = tail_bounds(m, lambda, kn, a * xp, x.abs());
        if tb < SERIES_TOL && dtb < 1e2 * SERIES_TOL {
            return Ok(SeriesEval { value, derivative: deriv, tail_bound: tb, terms: kn });
        }
    }
    Err(SpecError::Numerical(format!(
        "Legendre series did not reach tolerance within {MAX_TERMS} terms (m={m}, λ={lambda}, t={t})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_eigenfunction_is_exact() {
        for m in 2..6 {
            for &t in &[-0.9, -0.3, 0.0, 0.4, 0.99] {
                let e = legendre_series_eval(m, m as f64, t, 10).unwrap();
                // 1 − (1 − t) rounds to within one ulp of t
                assert!((e.value - t).abs() <= 2.0 * f64::EPSILON);
                assert_eq!(e.tail_bound, 0.0);
                let a = legendre_series_auto(m, m as f64, t).unwrap();
                assert!((a.value - t).abs() <= 2.0 * f64::EPSILON);
                assert_eq!(a.derivative, 1.0);
            }
        }
    }

    #[test]
    fn only_constant_term_at_pole() {
        let e = legendre_series_auto(3, 7.3, 1.0).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn hemisphere_node() {
        assert_eq!(legendre_series_auto(2, 2.0, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn outside_interval_is_domain_error() {
        assert!(legendre_series_eval(2, 1.0, -1.0, 5).is_err());
        assert!(legendre_series_auto(2, 1.0, 3.5).is_err());
    }

    #[test]
    fn legendre_p2_for_sphere() {
        // λ = 6 on S² gives P₂(t) = (3t² − 1)/2 normalized to 1 at t = 1
        let e = legendre_series_auto(2, 6.0, 0.3).unwrap();
        assert!((e.value - (3.0 * 0.09 - 1.0) / 2.0).abs() < 1e-14);
        assert!((e.derivative - 0.9).abs() < 1e-13);
    }

    #[test]
    fn coefficients_decay_geometrically() {
        let s = SeriesSolution::new(3, 9.7, 60);
        let k0 = 4;
        let c = s.coefficients[k0].abs() * 2f64.powi(k0 as i32) * 4.0;
        for k in k0..=60 {
            assert!(s.coefficients[k].abs() <= c * 0.5f64.powi(k as i32 - 1) * (k as f64));
        }
    }
}
