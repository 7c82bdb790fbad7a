use std::f64::consts::PI;

use proptest::prelude::*;
use speclab::radial::*;
use speclab::spaceform::*;

const DISK_LAMBDA1: f64 = 5.783185962946784;

#[test]
fn series_and_shooting_agree() {
    for m in [2usize, 3, 4] {
        for rho in [PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            let s = SpaceForm::sphere(m);
            let a = cap_eigenvalue_with_mode(s, rho, 0.0, 1, EigenMethod::Series).unwrap();
            let b = cap_eigenvalue_with_mode(s, rho, 0.0, 1, EigenMethod::Shooting).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "m={m} ρ={rho}: {a} vs {b}");
        }
    }
}

#[test]
fn shooting_profile_matches_series_profile() {
    let s = SpaceForm::sphere(3);
    let a = cap_first_eigenvalue(s, 1.2).unwrap();
    let b = cap_first_eigenvalue_shooting(s, 1.2).unwrap();
    for (x, y) in a.profile.iter().zip(&b.profile) {
        assert!((x - y).abs() < 1e-8);
    }
    assert!((a.boundary_slope - b.boundary_slope).abs() < 1e-8);
}

#[test]
fn disk_matches_bessel_oracle() {
    let e = cap_first_eigenvalue(SpaceForm::euclidean(2), 1.0).unwrap();
    assert!((e.lambda - DISK_LAMBDA1).abs() < 1e-9, "{}", e.lambda);
}

#[test]
fn eigenfunction_normalized_and_positive() {
    for space in [SpaceForm::sphere(2), SpaceForm::euclidean(3), SpaceForm::hyperbolic(2)] {
        let e = cap_first_eigenvalue(space, 1.1).unwrap();
        assert_eq!(e.normalization, 1.0);
        let h = e.interpolant();
        let m = space.dim as i32;
        let mass = space.unit_sphere_area()
            * speclab::numerics::quadrature::integrate(|p| h.eval(p).powi(2) * space.sn(p).powi(m - 1), 0.0, 1.1, 1e-14);
        assert!((mass - 1.0).abs() < 1e-10);
        assert!(e.profile[..e.profile.len() - 1].iter().all(|&u| u > 0.0));
        assert_eq!(*e.profile.last().unwrap(), 0.0);
        assert!(e.boundary_slope < 0.0);
    }
}

#[test]
fn degree_one_profile_is_minus_eigenfunction_slope() {
    for n in [2usize, 3] {
        let s = SpaceForm::sphere(n);
        let rho = 1.0;
        let e = cap_first_eigenvalue(s, rho).unwrap();
        let g = angular_radial_solution(s, rho, n as f64 - 1.0, e.lambda).unwrap();
        for (i, gi) in g.values.iter().enumerate() {
            assert!((gi + e.profile_slope[i]).abs() < 1e-8, "n={n} node {i}");
        }
    }
}

#[test]
fn coefficient_decay_beyond_growth_index() {
    for (m, lambda) in [(2usize, 3.7), (3, 12.0), (5, 40.0)] {
        let s = SeriesSolution::new(m, lambda, 80);
        let k0 = (0..).find(|&k: &usize| (k * k + (m - 1) * k) as f64 > lambda).unwrap() + 1;
        let c = s.coefficients[k0].abs() * 2f64.powi(k0 as i32);
        for k in k0..=80 {
            // |a_k| ≤ C·2^{−k} up to the slowly varying factor k^{(m−4)/2}
            let poly = (k as f64 / k0 as f64).powf(((m as f64 - 4.0) / 2.0).max(0.0));
            assert!(s.coefficients[k].abs() <= 1.0001 * c * 0.5f64.powi(k as i32) * poly, "m={m} k={k}");
        }
    }
}

#[test]
fn series_is_lipschitz_in_lambda() {
    let m = 2;
    let dl = 1e-4;
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let t = i as f64 / 20.0 * 0.9;
        for j in 0..10 {
            let l = 1.0 + j as f64;
            let a = legendre_series_auto(m, l, t).unwrap().value;
            let b = legendre_series_auto(m, l + dl, t).unwrap().value;
            worst = worst.max((a - b).abs() / dl);
        }
    }
    assert!(worst.is_finite() && worst < 10.0, "Lipschitz constant {worst}");
}

#[test]
fn torsion_and_eigenvalue_domain_monotone() {
    for space in [SpaceForm::sphere(2), SpaceForm::euclidean(2), SpaceForm::sphere(3)] {
        let mut prev = (f64::INFINITY, 0.0);
        for rho in [0.4, 0.8, 1.2, 1.6, 2.0] {
            let l = first_eigenvalue(space, rho).unwrap();
            let t = torsion_value(space, rho).unwrap();
            assert!(l < prev.0 && t < prev.1);
            prev = (l, t);
        }
    }
}

#[test]
fn tail_bound_reported() {
    let e = legendre_series_eval(3, 4.2, -0.5, 30).unwrap();
    let exact = legendre_series_auto(3, 4.2, -0.5).unwrap();
    assert!((e.value - exact.value).abs() <= e.tail_bound + 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn volume_round_trip(rho in 0.01f64..3.1, m in 2usize..5) {
        let s = SpaceForm::sphere(m);
        let v = cap_volume(s, rho).unwrap();
        let r = radius_for_volume(s, v).unwrap();
        prop_assert!((r - rho).abs() < 1e-10 * rho);
    }

    #[test]
    fn euclidean_volume_scaling(rho in 0.01f64..5.0, s in 0.1f64..4.0, m in 1usize..6) {
        let e = SpaceForm::euclidean(m);
        let a = cap_volume(e, s * rho).unwrap();
        let b = s.powi(m as i32) * cap_volume(e, rho).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn sphere_curvature_decreasing(a in 0.05f64..3.0, d in 0.01f64..0.1) {
        let s = SpaceForm::sphere(3);
        prop_assert!(mean_curvature(s, a + d).unwrap() < mean_curvature(s, a).unwrap());
    }
}
