use std::f64::consts::PI;

use speclab::dtn::{
    self, calibration, dtn_eigenvalue, second_variation, second_variation_with, solve_w_xi, spectral_gap_scan,
    BoundaryPerturbation, DtnSpectrum, EtaCache, EtaConvention,
};

#[test]
fn calibration_scores() {
    let cal = calibration().unwrap();
    for s in &cal.scores {
        println!("{:?}", s);
    }
    let sh = cal.scores.iter().find(|s| s.convention == EtaConvention::ShapeHessian).unwrap();
    assert!(sh.nullity < 1e-8 && sh.form_mismatch < 1e-9);
    let me = cal.scores.iter().find(|s| s.convention == EtaConvention::ModeExpansion).unwrap();
    assert!(me.printed_form_mismatch < 1e-9, "mode expansion reproduces the printed form");
    assert!(me.nullity > 1e-3);
}

#[test]
fn gap_scan_on_grid() {
    for n in [2, 3] {
        let scan = spectral_gap_scan(n, &[PI / 3.0, PI / 2.0, 2.0 * PI / 3.0], 6).unwrap();
        assert!(scan.all_ok, "{scan:?}");
        assert!(scan.max_rel_eta_deg1 < 1e-6);
        assert!(scan.min_eta_deg2 > 0.0);
    }
}

#[test]
fn translation_mode_is_null_for_every_radius() {
    for n in [2, 3, 4] {
        for rho in [0.3, 0.9, 1.7, 2.6] {
            let e1 = dtn_eigenvalue(n, rho, 1).unwrap();
            let e2 = dtn_eigenvalue(n, rho, 2).unwrap();
            assert!(e1.abs() < 1e-8 * e2, "n={n} rho={rho} e1={e1} e2={e2}");
        }
    }
}

#[test]
fn mode_sum_matches_quadrature() {
    let xi = BoundaryPerturbation::new(2, 1.2).with(2, 0, 0.4).with(3, 1, -0.2).with(1, 0, 0.7).with(5, 0, 0.05);
    let sv = second_variation(2, 1.2, &xi).unwrap();
    assert!(sv.rel_mismatch < 1e-8, "{sv:?}");
    let xi3 = BoundaryPerturbation::new(3, 0.8).with(2, 3, 1.0).with(4, 0, 0.3);
    let sv3 = second_variation(3, 0.8, &xi3).unwrap();
    assert!(sv3.rel_mismatch < 1e-8, "{sv3:?}");
    // pure translation: both evaluations vanish
    let t = BoundaryPerturbation::new(2, 2.0).with(1, 1, 1.0);
    let sv = second_variation(2, 2.0, &t).unwrap();
    assert!(sv.mode_sum.abs() < 1e-8 && sv.quadrature.abs() < 1e-8);
}

#[test]
fn printed_form_is_not_translation_invariant_off_the_equator() {
    let t = BoundaryPerturbation::new(2, 1.0).with(1, 0, 1.0);
    let sv = second_variation_with(2, 1.0, &t, EtaConvention::ModeExpansion).unwrap();
    assert!(sv.printed_quadrature.abs() > 1e-2);
}

#[test]
fn mean_must_vanish() {
    let xi = BoundaryPerturbation::new(2, 1.0).with(0, 0, 0.1);
    assert!(second_variation(2, 1.0, &xi).is_err());
}

#[test]
fn eta_increases_with_degree() {
    let spec = DtnSpectrum::build(3, 1.0, 10, EtaConvention::ShapeHessian).unwrap();
    assert!(spec.modes.windows(2).all(|w| w[1].eta > w[0].eta));
}

#[test]
fn w_field_solves_the_mode_equation() {
    let xi = BoundaryPerturbation::new(2, 1.0).with(2, 0, 1.0).with(3, 1, 0.5);
    let w = solve_w_xi(2, 1.0, &xi).unwrap();
    let r = w.radial_residual();
    assert!(r < 1e-4, "residual {r}");
    // boundary trace reproduces |u'| ξ
    let up = w.scalars.u_prime;
    for th in [0.0, 0.7, 2.1] {
        let v = w.eval(1.0, th).unwrap();
        assert!((v - up * xi.eval(th).unwrap()).abs() < 1e-10);
    }
    let c = dtn::l2_bound_constant(2, 1.0, 8).unwrap();
    assert!(w.l2_norm() <= c * xi.l2_norm() * (1.0 + 1e-12));
}

#[test]
fn cache_round_trips_through_csv() {
    for k in 1..=3 {
        dtn_eigenvalue(2, 1.3, k).unwrap();
    }
    let dir = std::env::temp_dir().join(format!("speclab-eta-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eta.csv");
    EtaCache::global().save_csv(&path).unwrap();
    let fresh = EtaCache::default();
    let n = fresh.load_csv(&path).unwrap();
    assert!(n >= 3);
    let e = fresh.get_or_compute(2, 1.3, 2, EtaConvention::ShapeHessian).unwrap();
    assert_eq!(e.eta, dtn_eigenvalue(2, 1.3, 2).unwrap());
    std::fs::write(&path, "n,rho\n2,oops\n").unwrap();
    assert!(fresh.load_csv(&path).is_err());
    std::fs::remove_dir_all(&dir).ok();
}
