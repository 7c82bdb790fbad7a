use std::f64::consts::PI;

use speclab::acf::corpus::{blowup, drift, halfplane};
use speclab::acf::*;
use speclab::numerics::quadrature::integrate;
use speclab::SpecError;

fn coarse() -> AcfGrid {
    AcfGrid::new(256, 128, 2f64.powi(-8)).unwrap()
}

fn single(name: &str, g: &AcfGrid) -> AdmissiblePair {
    corpus(name, g).unwrap().remove(0)
}

#[test]
fn halfplane_j_is_constant() {
    let p = halfplane(&AcfGrid::default(), 0.0).unwrap();
    let prof = acf_profile(&p);
    for j in &prof.j {
        assert!((j / (PI * PI / 4.0) - 1.0).abs() < 5e-3, "{j}");
    }
    assert!(prof.monotonicity_violation() < 1e-12);
}

#[test]
fn vanishing_field_gives_zero_j() {
    let g = coarse();
    let u1 = PolarField::from_fn(2, &g, |r, t| r * t.sin()).unwrap();
    let u2 = PolarField::from_fn(2, &g, |_, _| 0.0).unwrap();
    let p = AdmissiblePair::new("zero", u1, u2).unwrap();
    assert_eq!(acf_J(&p, 0.5).unwrap(), 0.0);
}

#[test]
fn j_outside_grid_is_a_domain_error() {
    let p = halfplane(&coarse(), 0.0).unwrap();
    assert!(matches!(acf_J(&p, 1e-6), Err(SpecError::Domain(_))));
}

#[test]
fn arc_eigenvalue_examples() {
    assert!((arc_eigenvalue(PI, 1.0) - 1.0).abs() < 1e-15);
    assert!((arc_eigenvalue(2.0 * PI, 1.0) - 0.25).abs() < 1e-15);
    assert!((arc_eigenvalue(PI / 2.0, 1.0) - 4.0).abs() < 1e-15);
}

#[test]
fn arc_decomposition_of_sampled_sets() {
    let g = coarse();
    let semi = PolarField::from_fn(2, &g, |r, t| r * t.sin()).unwrap();
    let d = arc_decomposition(&semi, 1.0).unwrap();
    assert_eq!(d.arcs.len(), 1);
    assert!((d.lambda1 - 1.0).abs() < 1e-10, "{}", d.lambda1);
    let quarter = PolarField::from_fn(2, &g, |r, t| if t < PI / 2.0 { r * r * (2.0 * t).sin() } else { 0.0 }).unwrap();
    let d = arc_decomposition(&quarter, 1.0).unwrap();
    assert!((d.lambda1 - 4.0).abs() < 1e-3, "{}", d.lambda1);
    let full = PolarField::from_fn(2, &g, |r, t| r * (2.0 + t.cos())).unwrap();
    let d = arc_decomposition(&full, 1.0).unwrap();
    assert!(d.full_circle);
    assert!((d.lambda1 - 0.25).abs() < 1e-12);
    let empty = PolarField::from_fn(2, &g, |r, t| if r < 0.5 { r * t.sin() } else { 0.0 }).unwrap();
    assert!(arc_decomposition(&empty, 1.0).is_err());
}

#[test]
fn halfplane_deficits_vanish() {
    let p = halfplane(&coarse(), 0.0).unwrap();
    let r = p.radii()[64];
    let row = deficit_terms_2d(&p, r).unwrap();
    for d in [row.delta_a, row.delta_b, row.delta_c] {
        assert!(d.abs() < 1e-10, "{d}");
    }
}

#[test]
fn delta_c_closed_form_for_symmetric_sectors() {
    let g = AcfGrid::default();
    let th = PI - 0.1;
    let a = PI / th;
    let u1 = PolarField::from_fn(2, &g, |r, t| if t < th { r.powf(a) * (a * t).sin() } else { 0.0 }).unwrap();
    let u2 =
        PolarField::from_fn(2, &g, |r, t| if t > 2.0 * PI - th { r.powf(a) * (a * (2.0 * PI - t)).sin() } else { 0.0 }).unwrap();
    let p = AdmissiblePair::new("sectors", u1, u2).unwrap();
    let r = p.radii()[200];
    let row = deficit_terms_2d(&p, r).unwrap();
    let exact = (2.0 / r) * (2.0 * a - 2.0);
    let rhs = (2.0 / r) * 2.0 * (PI - th).powi(2) / (th * (2.0 * PI - th));
    assert!((row.delta_c - exact).abs() < 1e-4 * exact, "{} vs {exact}", row.delta_c);
    assert!(row.delta_c > 0.0);
    assert!(row.delta_c >= rhs, "{} < {rhs}", row.delta_c);
    assert!((row.delta_c_rhs[0] - rhs).abs() < 1e-4 * rhs);
    assert!(row.delta_c_ok);
}

#[test]
fn delta_b_matches_quadrature_oracle() {
    // u = r^{1.2} sin⁺: r·δ_B = r²∫(u/r − ∂_r u)² dσ / ∫_{B_r}|∇u|² = 0.04·2.4/2.44
    let p = single("homogeneity", &AcfGrid::default());
    let oracle = 0.04 * 2.4 / 2.44;
    for k in [100, 200, 254] {
        let r = p.radii()[k];
        let row = deficit_terms_2d(&p, r).unwrap();
        for f in &row.fields {
            assert!((f.delta_b * r / oracle - 1.0).abs() < 1e-4, "r={r}: {}", f.delta_b * r);
        }
        assert!((row.delta_b - row.fields[0].delta_b - row.fields[1].delta_b).abs() < 1e-15 * row.delta_b);
    }
}

#[test]
fn scaling_leaves_deficits_invariant() {
    let g = coarse();
    let p = single("radial", &g);
    let q = p.scaled(3.0, 0.25);
    let (a, b) = (acf_profile(&p), acf_profile(&q));
    let top = a.j.len() - 1;
    let ratio = |x: &AcfProfile| x.j[top] / x.at(0.5).unwrap();
    assert!((ratio(&a) - ratio(&b)).abs() < 1e-12 * ratio(&a));
    let r = p.radii()[70];
    let (x, y) = (deficit_terms_2d(&p, r).unwrap(), deficit_terms_2d(&q, r).unwrap());
    for (s, t) in [(x.delta_a, y.delta_a), (x.delta_b, y.delta_b), (x.delta_c, y.delta_c)] {
        assert!((s - t).abs() <= 1e-12 * s.abs().max(1.0), "{s} vs {t}");
    }
}

#[test]
fn corpus_pairs_satisfy_the_deficit_inequality() {
    let g = coarse();
    for p in corpus("default", &g).unwrap() {
        let d = acf_deficits(&p).unwrap();
        assert!(d.monotone, "{}: violation {}", p.name, d.monotonicity_violation);
        assert!(d.inequality_holds, "{}", p.name);
        assert!(d.bounds_hold, "{}", p.name);
        assert!(d.skipped.is_empty());
    }
}

#[test]
fn axisymmetric_pairs_have_closed_form_delta_c() {
    let g = coarse();
    for n in [3, 4] {
        let hs = corpus::halfspace(&g, n).unwrap();
        let r = hs.radii()[64];
        let row = deficit_terms_nd_axisym(&hs, r).unwrap();
        assert!(r * row.delta_c.abs() < hs.u1.resolution(), "n={n}: {}", row.delta_c);
        assert!(r * row.delta_b.abs() < 1e-10);
        assert!(row.delta_c_ok);
        let cp = corpus::cap_pair(&g, n).unwrap();
        let r = cp.radii()[64];
        let row = deficit_terms_nd_axisym(&cp, r).unwrap();
        let eig = speclab::radial::cap_first_eigenvalue(speclab::spaceform::SpaceForm::sphere(n - 1), PI / 2.0 - corpus::CAP_GAP)
            .unwrap();
        let a = characteristic_constant(n, eig.lambda, 1.0).unwrap();
        let exact = (2.0 / r) * (2.0 * a - 2.0);
        assert!((row.delta_c - exact).abs() < 1e-3 * exact, "n={n}: {} vs {exact}", row.delta_c);
        assert!(row.delta_c_ok);
    }
}

#[test]
fn polar_bands_are_unsupported() {
    let g = coarse();
    let band = PolarField::from_fn(3, &g, |r, phi| r * (PI / 6.0 - (phi - PI / 2.0).abs()).max(0.0)).unwrap();
    let cap = PolarField::from_fn(3, &g, |r, phi| r * (PI / 6.0 - phi).max(0.0)).unwrap();
    let p = AdmissiblePair::new("band", band, cap).unwrap();
    let r = p.radii()[64];
    assert!(matches!(deficit_terms_nd_axisym(&p, r), Err(SpecError::Unsupported(_))));
    assert!(matches!(deficit_terms_2d(&p, r), Err(SpecError::Domain(_))));
}

#[test]
fn characteristic_constant_examples() {
    for n in [2, 3, 4] {
        assert!((characteristic_constant(n, (n - 1) as f64, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(characteristic_constant(n, 0.0, 1.0).unwrap(), 0.0);
    }
    assert!((characteristic_constant(3, 6.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn alpha_hat_is_one_at_half_and_convex() {
    for n in [3, 4] {
        assert!((alpha_hat(n, 0.5).unwrap().alpha - 1.0).abs() < 1e-8);
        let ts: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
        let prof = alpha_hat_profile(n, &ts).unwrap();
        assert!(prof.c_est > 0.0);
        assert!(prof.convex);
        for d in prof.deltas.iter().filter(|d| d.h.abs() <= 0.2 + 1e-12) {
            assert!(d.bound_holds, "n={n} h={}", d.h);
        }
    }
    assert!(alpha_hat(2, 0.5).is_err());
}

#[test]
fn sine_misalignment_ratios_are_bounded() {
    let z = sine_misalignment(0.0, 1.0).unwrap();
    assert_eq!(z.shift_integral, 0.0);
    assert!(z.frequency_integral.abs() < 1e-14);
    let ratios: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&t| sine_misalignment(t, 1.0).unwrap().shift_ratio.unwrap()).collect();
    for r in &ratios {
        assert!(*r > 0.0 && *r < 2.0, "{r}");
    }
    assert!((ratios[0] - ratios[2]).abs() < 0.2 * ratios[2]);
    let f = sine_misalignment(0.0, 0.81).unwrap();
    assert!(f.frequency_ratio.unwrap() > 0.0);
    assert!(sine_misalignment(0.0, 4.0).is_err());
}

#[test]
fn stability_fit_recovers_halfplanes() {
    let g = coarse();
    let p = halfplane(&g, 0.0).unwrap();
    let s = stability_fit(&p, 0.5).unwrap();
    for b in s.beta {
        assert!((b - 1.0).abs() < 1e-12, "{b}");
    }
    assert!(s.l2_error < 1e-20);
    assert!(s.ratio.is_none());
    let q = halfplane(&g, corpus::ROTATION).unwrap().scaled(2.0, 0.5);
    let s = stability_fit(&q, 0.5).unwrap();
    assert!((s.nu_angle.unwrap() - corpus::ROTATION).abs() < q.u1.resolution());
    assert!((s.beta[0] - 2.0).abs() < 1e-9 && (s.beta[1] - 0.5).abs() < 1e-9);
    assert!(matches!(stability_fit(&p, 0.75), Err(SpecError::Domain(_))));
}

#[test]
fn stability_fit_is_linear_in_the_fields() {
    let g = coarse();
    let p = drift(&g, 0.1).unwrap();
    let a = stability_fit(&p, 0.5).unwrap();
    let b = stability_fit(&p.scaled(3.0, 0.5), 0.5).unwrap();
    assert!((b.beta[0] / a.beta[0] - 3.0).abs() < 1e-12);
    assert!((b.beta[1] / a.beta[1] - 0.5).abs() < 1e-12);
    assert!((a.nu_angle.unwrap() - b.nu_angle.unwrap()).abs() < 1e-12);
    assert!((a.ratio.unwrap() - b.ratio.unwrap()).abs() < 1e-6 * a.ratio.unwrap() + 0.1);
}

#[test]
fn drift_pairs_witness_sharpness_of_the_log_coupling() {
    let g = coarse();
    let ratios: Vec<f64> =
        [0.2, 0.1, 0.05, 0.025].iter().map(|&b| stability_fit(&drift(&g, b).unwrap(), 0.5).unwrap().ratio.unwrap()).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 1.5, "{ratios:?}");
}

#[test]
fn one_homogeneity_matches_quadrature() {
    let g = AcfGrid::default();
    let u = |r: f64, t: f64| r.powf(1.1) * t.sin();
    let p = AdmissiblePair::new(
        "r^1.1",
        PolarField::from_fn(2, &g, u).unwrap(),
        PolarField::from_fn(2, &g, move |r, t| -u(r, t)).unwrap(),
    )
    .unwrap();
    for rho in [0.5, 0.3, 0.1] {
        let h = one_homogeneity_error(&p, rho).unwrap();
        let oracle = PI / 2.0 * integrate(|r: f64| r.powi(3) - 2.0 * r.powf(3.1) + r.powf(3.2), rho, 1.0, 1e-14);
        assert!((h.fields[0].error - oracle).abs() < 1e-8, "ρ={rho}: {} vs {oracle}", h.fields[0].error);
        assert!(h.fields[0].ratio.unwrap() > 0.0);
    }
    let hp = one_homogeneity_error(&halfplane(&g, 0.0).unwrap(), 0.5).unwrap();
    assert!(hp.fields[0].error < 1e-25 && hp.fields[0].ratio.is_none());
}

#[test]
fn gradient_energy_ratio_of_halfplane_is_four() {
    let g = coarse();
    let p = halfplane(&g, 0.0).unwrap();
    let r = gradient_energy_ratio(&p).unwrap();
    assert!((r[0] - 4.0).abs() < 1e-3 && (r[1] - 4.0).abs() < 1e-3, "{r:?}");
    let q = single("sector", &g);
    let (a, b) = (gradient_energy_ratio(&q).unwrap(), gradient_energy_ratio(&q.scaled(5.0, 0.1)).unwrap());
    assert!((a[0] - b[0]).abs() < 1e-12 * a[0]);
}

#[test]
fn blowup_fit_of_halfplane_is_constant() {
    let p = halfplane(&coarse(), 0.0).unwrap();
    let f = blowup_scale_fit(&p, 3).unwrap();
    assert_eq!(f.scales.len(), 4);
    for s in &f.scales[1..] {
        assert!(s.increment.unwrap() < 1e-12);
    }
}

#[test]
fn blowup_fit_truncates_unresolved_scales() {
    let p = halfplane(&coarse(), 0.0).unwrap();
    let f = blowup_scale_fit(&p, 12).unwrap();
    assert!(f.k_max < 12);
    assert!(!f.warnings.is_empty());
}

#[test]
fn blowup_pair_increments_follow_root_omega() {
    let p = blowup(&coarse()).unwrap();
    let f = blowup_scale_fit(&p, 8).unwrap();
    assert!(f.rate_error.unwrap() < 0.25, "{f:?}");
    let c2: Vec<f64> = f.scales.iter().filter_map(|s| s.c2).collect();
    let (lo, hi) = (c2.iter().cloned().fold(f64::INFINITY, f64::min), c2.iter().cloned().fold(0.0, f64::max));
    assert!(hi / lo < 1.5, "{c2:?}");
}

#[test]
fn reports_characterize_equality() {
    let g = coarse();
    let hp = AcfPairReport::new(&halfplane(&g, 0.3).unwrap()).unwrap();
    assert!(hp.passed && hp.equality.deficits_vanish && hp.equality.fit_exact);
    let dr = AcfPairReport::new(&drift(&g, 0.1).unwrap()).unwrap();
    assert!(dr.passed && !dr.equality.deficits_vanish && !dr.equality.fit_exact);
}

#[test]
fn csv_ingestion_reports_line_numbers() {
    let dir = std::env::temp_dir().join(format!("speclab-acf-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.csv");
    std::fs::write(&path, "r,theta,u1,u2\n0.5,0,1,0\n0.5,1,1,0\n1,0,nan?,0\n").unwrap();
    match load_pair_csv(&path, 2) {
        Err(SpecError::Ingestion { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    let g = AcfGrid::new(64, 16, 0.05).unwrap();
    let p = single("drift-0.1", &g);
    let good = dir.join("drift.csv");
    write_pair_csv(&p, std::fs::File::create(&good).unwrap()).unwrap();
    let q = load_pair_csv(&good, 2).unwrap();
    assert_eq!(q.name, "drift");
    assert_eq!(q.u2.values, p.u2.values);
    assert!(matches!(load_pair_csv(&good, 3), Err(SpecError::Ingestion { line: 1, .. })));
    std::fs::remove_dir_all(&dir).unwrap();
}
