//! Independent oracles for derived anchor values. Each oracle shares no code with
//! the library paths it checks; the numbers they produce are frozen below and the
//! library is tested against the frozen numbers elsewhere.

use nalgebra::{DMatrix, SymmetricEigen};

/// λ₁ of the unit disk, j_{0,1}², frozen from the Richardson-extrapolated oracle below.
pub const DISK_LAMBDA1: f64 = 5.783185962946784;
/// tor(B₁) in the plane, −π/16.
pub const DISK_TORSION: f64 = -std::f64::consts::PI / 16.0;

/// Smallest eigenvalue of the symmetric tridiagonal matrix by Sturm bisection.
fn sturm_smallest(diag: &[f64], off: &[f64]) -> f64 {
    let count_below = |x: f64| {
        let mut c = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            c += 1;
        }
        for i in 1..diag.len() {
            let qq = if q == 0.0 { 1e-300 } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / qq;
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cell-centered finite differences for −(r u')'/r = λu on (0,1), u(1)=0.
fn disk_fd(n: usize) -> f64 {
    let h = 1.0 / (n as f64 + 0.5);
    let r: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let diag: Vec<f64> = r.iter().map(|&ri| ((ri + h / 2.0) + (ri - h / 2.0)) / (h * h) / ri).collect();
    // symmetrized with the weight r
    let off: Vec<f64> = (0..n - 1).map(|i| -(r[i] + h / 2.0) / (h * h) / (r[i] * r[i + 1]).sqrt()).collect();
    sturm_smallest(&diag, &off)
}

#[test]
fn bessel_oracle_reproduces_frozen_value() {
    let a = disk_fd(2000);
    let b = disk_fd(4000);
    let extrapolated = (4.0 * b - a) / 3.0;
    assert!((extrapolated - DISK_LAMBDA1).abs() < 1e-8, "oracle {extrapolated}");
}

#[test]
fn torsion_quadrature_oracle() {
    // composite Simpson in r of 2π r (1 − r²)/4, then −½ of the integral
    let n = 2000;
    let h = 1.0 / n as f64;
    let f = |r: f64| 2.0 * std::f64::consts::PI * r * (1.0 - r * r) / 4.0;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let tor = -0.5 * s * h / 3.0;
    assert!((tor - DISK_TORSION).abs() < 1e-13);
}

/// Dense 2D finite-difference spectrum of a cap of radius ρ in S², (φ, θ) grid.
pub fn cap_fd_spectrum(rho: f64, n_phi: usize, n_theta: usize) -> Vec<f64> {
    let d = rho / (n_phi as f64 + 0.5);
    let dt = 2.0 * std::f64::consts::PI / n_theta as f64;
    let n = n_phi * n_theta;
    let idx = |j: usize, k: usize| j * n_theta + k % n_theta;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut w = vec![0.0; n];
    for j in 0..n_phi {
        let phi = (j as f64 + 0.5) * d;
        let s = phi.sin();
        for k in 0..n_theta {
            let i = idx(j, k);
            w[i] = s * d * dt;
            // radial faces
            let sp = (phi + d / 2.0).sin() * dt / d;
            a[(i, i)] += sp;
            if j + 1 < n_phi {
                let o = idx(j + 1, k);
                a[(i, o)] -= sp;
                a[(o, i)] -= sp;
                a[(o, o)] += sp;
            }
            // angular faces
            let c = d / (s * dt);
            let o = idx(j, k + 1);
            a[(i, i)] += c;
            a[(o, o)] += c;
            a[(i, o)] -= c;
            a[(o, i)] -= c;
        }
    }
    for i in 0..n {
        for l in 0..n {
            a[(i, l)] /= (w[i] * w[l]).sqrt();
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn cap_second_eigenvalue_matches_2d_finite_differences() {
    let rho = 1.0;
    let coarse = cap_fd_spectrum(rho, 20, 32);
    let fine = cap_fd_spectrum(rho, 40, 32);
    let extrap = |i: usize| (4.0 * fine[i] - coarse[i]) / 3.0;
    let l1 = speclab::radial::first_eigenvalue(speclab::spaceform::SpaceForm::sphere(2), rho).unwrap();
    let l2 = speclab::radial::cap_second_eigenvalue(speclab::spaceform::SpaceForm::sphere(2), rho).unwrap();
    assert!((extrap(0) - l1).abs() < 2e-3 * l1, "λ1 fd {} vs {}", extrap(0), l1);
    // the degree-one angular mode is doubly degenerate
    assert!((extrap(1) - l2).abs() < 2e-3 * l2, "λ2 fd {} vs {}", extrap(1), l2);
    assert!((extrap(2) - l2).abs() < 2e-3 * l2);
}
