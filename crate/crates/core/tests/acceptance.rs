//! Acceptance criteria, one pass/fail line each. Runs without the test harness so the
//! lines are always printed; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use speclab::acf::corpus::blowup;
use speclab::acf::{self, alpha_hat, alpha_hat_profile, blowup_scale_fit, corpus, AcfGrid, AcfPairReport};
use speclab::dtn::{spectral_gap_scan, BoundaryPerturbation};
use speclab::perturbed::{perturbed_eigenvalue, second_variation_limit, translated_radius, PolarGrid, SolverConfig};
use speclab::radial::{cap_eigenvalue_with_mode, cap_first_eigenvalue, kj_deficit_curves, legendre_series_eval, EigenMethod};
use speclab::spaceform::SpaceForm;

/// λ₁ of the unit disk, frozen from the Richardson-extrapolated finite-difference oracle.
const DISK_LAMBDA1: f64 = 5.783185962946784;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn spread(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn eigenvalue_anchors() -> Check {
    let mut worst: f64 = 0.0;
    for m in [2, 3, 4] {
        let l = cap_first_eigenvalue(SpaceForm::sphere(m), PI / 2.0).map_err(|e| e.to_string())?.lambda;
        worst = worst.max((l - m as f64).abs());
    }
    let disk = cap_first_eigenvalue(SpaceForm::euclidean(2), 1.0).map_err(|e| e.to_string())?.lambda;
    let disk_err = (disk - DISK_LAMBDA1).abs();
    ensure(worst < 1e-8 && disk_err < 1e-6, format!("hemisphere max |λ−m| = {worst:.3e}, disk |λ−oracle| = {disk_err:.3e}"))
}

fn series_shooting_agreement() -> Check {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for m in [2usize, 3, 4] {
        for rho in [PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            let s = SpaceForm::sphere(m);
            let a = cap_eigenvalue_with_mode(s, rho, 0.0, 1, EigenMethod::Series).map_err(|e| e.to_string())?;
            let b = cap_eigenvalue_with_mode(s, rho, 0.0, 1, EigenMethod::Shooting).map_err(|e| e.to_string())?;
            worst = worst.max(((a - b) / a).abs());
            pairs += 1;
        }
    }
    let mut identity: f64 = 0.0;
    for m in [2usize, 3, 4, 5] {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let f = legendre_series_eval(m, m as f64, t, 64).map_err(|e| e.to_string())?.value;
            identity = identity.max((f - t).abs());
        }
    }
    ensure(
        pairs == 12 && worst < 1e-8 && identity <= 4.0 * f64::EPSILON,
        format!("{pairs} pairs, max rel diff {worst:.3e}; max |f_(λ=m)(t) − t| = {identity:.3e}"),
    )
}

fn dtn_gap() -> Check {
    let mut msgs = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        let scan = spectral_gap_scan(n, &[PI / 3.0, PI / 2.0, 2.0 * PI / 3.0], 6).map_err(|e| e.to_string())?;
        let h_ok = scan.h_checks.iter().all(|h| h.ok && h.min_interior > 0.0 && h.h_prime_rho < 0.0);
        ok &= scan.max_rel_eta_deg1 < 1e-6 && scan.min_eta_deg2 > 0.0 && h_ok;
        msgs.push(format!("n={n}: |η1|/η2 ≤ {:.2e}, min η2 = {:.4}, h checks {h_ok}", scan.max_rel_eta_deg1, scan.min_eta_deg2));
    }
    ensure(ok, msgs.join("; "))
}

fn unit_degree_two(rho: f64) -> BoundaryPerturbation {
    let xi = BoundaryPerturbation::in_space(SpaceForm::sphere(2), rho).with(2, 0, 1.0);
    let norm = xi.l2_norm();
    xi.scaled(1.0 / norm)
}

const LADDER: [f64; 3] = [0.04, 0.02, 0.01];

fn second_variation() -> Check {
    let cfg = SolverConfig::with_grid(PolarGrid::new(256, 128).unwrap());
    let lim = second_variation_limit(&unit_degree_two(1.0), &LADDER, &cfg).map_err(|e| e.to_string())?;
    let s2 = SpaceForm::sphere(2);
    let tcfg = SolverConfig { error_estimate: true, ..cfg };
    let mut worst: f64 = 0.0;
    for d in [0.03, 0.01] {
        let xi = BoundaryPerturbation::from_function(s2, 1.0, |t| translated_radius(s2, 1.0, d, t).unwrap() - 1.0, 40, 512);
        let r = perturbed_eigenvalue(&xi, &tcfg).map_err(|e| e.to_string())?;
        let tol = r.deficit_error_estimate.unwrap() + tcfg.tol * r.lambda_omega;
        worst = worst.max(r.deficit.abs() / tol);
    }
    ensure(
        lim.rel_error < 0.05 && worst < 10.0,
        format!(
            "extrapolated {:.6} vs ρ²Σηa² = {:.6} (rel {:.2e}; ratio to 2Σηa² is {:.4}); translated |deficit|/tol ≤ {worst:.3}",
            lim.extrapolated,
            lim.prediction,
            lim.rel_error,
            lim.extrapolated / (2.0 * lim.eta_mode_sum)
        ),
    )
}

fn fk_positivity() -> Check {
    let cfg = SolverConfig::with_grid(PolarGrid::new(256, 128).unwrap());
    let lim = second_variation_limit(&unit_degree_two(1.0), &LADDER, &cfg).map_err(|e| e.to_string())?;
    let c: Vec<f64> = lim.reports.iter().map(|r| r.c_est).collect();
    let q: Vec<f64> = lim.reports.iter().map(|r| r.quadratic_ratio).collect();
    let positive = c.iter().chain(&q).all(|x| x.is_finite() && *x > 0.0);
    ensure(
        positive && spread(&c) <= 0.2 && spread(&q) <= 0.2,
        format!("c_est {c:.4?} (spread {:.2e}); deficit/|ΩΔB|² {q:.4?} (spread {:.2e})", spread(&c), spread(&q)),
    )
}

struct AcfRuns {
    base: Vec<AcfPairReport>,
    refined: Vec<AcfPairReport>,
}

fn acf_runs() -> Result<AcfRuns, String> {
    let grid = AcfGrid::default();
    let run = |g: &AcfGrid| -> Result<Vec<AcfPairReport>, String> {
        let mut pairs = corpus("default", g).map_err(|e| e.to_string())?;
        pairs.extend(corpus("axisym", g).map_err(|e| e.to_string())?);
        let mut r = pairs.par_iter().map(AcfPairReport::new).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        r.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(r)
    };
    Ok(AcfRuns { base: run(&grid)?, refined: run(&grid.refined())? })
}

fn acf_monotonicity(runs: &AcfRuns) -> Check {
    let planar = runs.base.iter().filter(|r| r.dim == 2).count();
    let mono = runs.base.iter().all(|r| r.monotonicity.ok);
    let ineq = runs.base.iter().all(|r| !r.inequality.applicable || (r.inequality.ok && r.inequality.bounds_ok));
    let target = PI * PI / 4.0;
    let err = |rs: &[AcfPairReport]| {
        let h = rs.iter().find(|r| r.name == "halfplane").unwrap();
        (h.j_one.max(h.j_min) / target - 1.0).abs().max((h.j_one.min(h.j_min) / target - 1.0).abs())
    };
    let (e0, e1) = (err(&runs.base), err(&runs.refined));
    ensure(
        planar >= 6 && mono && ineq && e0 < 5e-3 && e1 < e0,
        format!(
            "{} pairs ({planar} planar): monotone {mono}, inequality and bounds {ineq}; half-plane J error {e0:.2e} → {e1:.2e}",
            runs.base.len()
        ),
    )
}

fn acf_stability(runs: &AcfRuns) -> Check {
    let h = runs.base.iter().find(|r| r.name == "halfplane").unwrap();
    let beta_err = h.stability.beta.iter().map(|b| (b - 1.0).abs()).fold(0.0, f64::max);
    let fit_ok = beta_err < 1e-10 && h.equality.relative_fit_error <= h.equality.fit_tol;
    let mut worst_change: f64 = 0.0;
    let mut largest: f64 = 0.0;
    let mut count = 0;
    for (a, b) in runs.base.iter().zip(&runs.refined) {
        if let (Some(x), Some(y)) = (a.stability.ratio, b.stability.ratio) {
            worst_change = worst_change.max((y / x - 1.0).abs());
            largest = largest.max(x.max(y));
            count += 1;
        }
    }
    ensure(
        fit_ok && count >= 4 && largest.is_finite() && largest < 1.0 && worst_change < 0.05,
        format!(
            "half-plane |β−1| = {beta_err:.2e}, L2/Σ‖u‖² = {:.2e}; {count} ratios ≤ {largest:.4}, change under refinement ≤ {worst_change:.2e}",
            h.equality.relative_fit_error
        ),
    )
}

fn kj_curves() -> Check {
    let mut msgs = Vec::new();
    let mut ok = true;
    for space in [SpaceForm::sphere(2), SpaceForm::euclidean(2)] {
        for big_r in [0.8, 1.5] {
            let ladder = |n: usize| (1..=n).map(|i| big_r * i as f64 / n as f64).collect::<Vec<_>>();
            let t = kj_deficit_curves(space, big_r, &ladder(256)).map_err(|e| e.to_string())?;
            let u = kj_deficit_curves(space, big_r, &ladder(512)).map_err(|e| e.to_string())?;
            let last = t.rows.last().unwrap();
            let bounded = t.rows.iter().all(|r| r.g <= t.c_est * r.f * (1.0 + 1e-12));
            let change = (u.c_est / t.c_est - 1.0).abs();
            ok &= t.f_decreasing && t.g_decreasing && last.f == 0.0 && last.g == 0.0 && bounded && change < 0.01;
            msgs.push(format!("{} R={big_r}: C_est {:.5}, change {change:.2e}", space.kind, t.c_est));
        }
    }
    ensure(ok, msgs.join("; "))
}

fn characteristic_convexity() -> Check {
    let mut msgs = Vec::new();
    let mut ok = true;
    let ladder: Vec<f64> = (0..19).map(|i| 0.05 + 0.05 * i as f64).collect();
    for n in [3, 4] {
        let half = (alpha_hat(n, 0.5).map_err(|e| e.to_string())?.alpha - 1.0).abs();
        let p = alpha_hat_profile(n, &ladder).map_err(|e| e.to_string())?;
        let bounds =
            p.deltas.iter().filter(|d| d.h.abs() <= acf::characteristic::CONVEXITY_WINDOW + 1e-12).all(|d| d.bound_holds);
        let h0 = p.deltas[0].h / 2.0;
        let refined = alpha_hat_profile(n, &[0.5 - h0, 0.5, 0.5 + h0]).map_err(|e| e.to_string())?;
        let change = (refined.c_est / p.c_est - 1.0).abs();
        ok &= half < 1e-8 && p.c_est > 0.0 && bounds && change < 0.05;
        msgs.push(format!("n={n}: |α̂(½)−1| = {half:.1e}, c_est {:.4}, bound {bounds}, change {change:.2e}", p.c_est));
    }
    ensure(ok, msgs.join("; "))
}

fn blowup_rate() -> Check {
    let pair = blowup(&AcfGrid::default()).map_err(|e| e.to_string())?;
    let fit = blowup_scale_fit(&pair, 10).map_err(|e| e.to_string())?;
    let (m, p, e) = (fit.measured_rate, fit.predicted_rate, fit.rate_error);
    match (m, p, e) {
        (Some(m), Some(p), Some(e)) => {
            ensure(e < 0.25, format!("k ≤ {}: measured rate {m:.5}, predicted {p:.5}, error {e:.3}", fit.k_max))
        }
        _ => Err(format!("too few resolved scales (k_max {})", fit.k_max)),
    }
}

fn main() {
    let mut results: Vec<(&str, Check, f64)> = Vec::new();
    let mut timed = |name: &'static str, f: &dyn Fn() -> Check| {
        let start = Instant::now();
        let r = f();
        results.push((name, r, start.elapsed().as_secs_f64()));
    };
    timed("1 eigenvalue anchors", &eigenvalue_anchors);
    timed("2 series/shooting cross-validation", &series_shooting_agreement);
    timed("3 D-to-N nullity and gap", &dtn_gap);
    timed("4 second-variation consistency", &second_variation);
    timed("5 quantitative FK positivity", &fk_positivity);
    let start = Instant::now();
    let runs = acf_runs();
    let acf_time = start.elapsed().as_secs_f64();
    match &runs {
        Ok(runs) => {
            timed("6 ACF monotonicity and deficit inequality", &|| acf_monotonicity(runs));
            timed("7 stability fit", &|| acf_stability(runs));
        }
        Err(e) => {
            results.push(("6 ACF monotonicity and deficit inequality", Err(e.clone()), acf_time));
            results.push(("7 stability fit", Err(e.clone()), 0.0));
        }
    }
    let mut timed = |name: &'static str, f: &dyn Fn() -> Check| {
        let start = Instant::now();
        let r = f();
        results.push((name, r, start.elapsed().as_secs_f64()));
    };
    timed("8 Kohler-Jobin curves", &kj_curves);
    timed("9 characteristic-constant convexity", &characteristic_convexity);
    timed("10 blowup fitting", &blowup_rate);
    println!("ACF corpus runs: {acf_time:.1}s");
    let mut failed = 0;
    for (name, r, secs) in &results {
        match r {
            Ok(m) => println!("PASS {name} ({secs:.1}s): {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {m}")
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
