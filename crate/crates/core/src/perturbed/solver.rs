use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dtn::{self, BoundaryPerturbation, EtaConvention};
use crate::error::{Result, SpecError};
use crate::numerics::linalg::{dot, pcg, Tridiag};
use crate::radial;
use crate::spaceform::{SpaceForm, SpaceKind};

use super::distances::{eigenfunction_distance, symmetric_difference};
use super::extension::{harmonic_extension, point_coefficients, HarmonicExtension};
use super::{check_smallness, PolarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: PolarGrid,
    /// σ = shift_factor · λ₁(B_ρ)
    pub shift_factor: f64,
    /// relative tolerance on the weighted Rayleigh quotient
    pub tol: f64,
    pub max_outer: usize,
    pub pcg_rtol: f64,
    /// also solve on the half-resolution grid and report Richardson error estimates
    pub error_estimate: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { grid: PolarGrid::default(), shift_factor: 0.9, tol: 1e-10, max_outer: 200, pcg_rtol: 1e-12, error_estimate: false }
    }
}

impl SolverConfig {
    pub fn with_grid(grid: PolarGrid) -> Self {
        Self { grid, ..Self::default() }
    }
}

/// Symmetric 9-point operator: `stencil[i][(dj+1)*3 + (dk+1)]` couples node i to
/// (j+dj, k+dk mod n_theta). Rows on ∂B_ρ are eliminated (Dirichlet).
pub(crate) struct Operator {
    grid: PolarGrid,
    stencil: Vec<[f64; 9]>,
    pub mass: Vec<f64>,
}

impl Operator {
    pub fn assemble(ext: &HarmonicExtension, grid: PolarGrid) -> Result<Self> {
        let rho = ext.xi.rho;
        let (np, nt) = (grid.n_phi, grid.n_theta);
        let dp = grid.dphi(rho);
        let dt = grid.dtheta();
        let mut stencil = vec![[0.0; 9]; grid.len()];
        let mut mass = vec![0.0; grid.len()];
        let idx = |j: usize, k: usize| j * nt + k;
        let add = |st: &mut Vec<[f64; 9]>, (j, k): (usize, usize), (jj, kk): (usize, usize), v: f64| {
            if j >= np || jj >= np {
                return;
            }
            let dj = jj as isize - j as isize;
            let dk = if kk == k {
                0
            } else if kk == (k + 1) % nt {
                1
            } else {
                -1
            };
            st[idx(j, k)][((dj + 1) * 3 + dk + 1) as usize] += v;
        };
        for j in 0..np {
            let phi = grid.phi(rho, j);
            let phi_f = (j + 1) as f64 * dp;
            for k in 0..nt {
                let k1 = (k + 1) % nt;
                let theta = grid.theta(k);
                let theta_f = theta + 0.5 * dt;
                let c = point_coefficients(ext, phi, theta)?;
                mass[idx(j, k)] = c.w * dp * dt;
                // radial face between rows j and j+1
                let w = point_coefficients(ext, phi_f, theta)?.c11 * dt / dp;
                add(&mut stencil, (j, k), (j, k), w);
                add(&mut stencil, (j + 1, k), (j + 1, k), w);
                add(&mut stencil, (j, k), (j + 1, k), -w);
                add(&mut stencil, (j + 1, k), (j, k), -w);
                // angular face between columns k and k+1
                let w = point_coefficients(ext, phi, theta_f)?.c22 * dp / dt;
                add(&mut stencil, (j, k), (j, k), w);
                add(&mut stencil, (j, k1), (j, k1), w);
                add(&mut stencil, (j, k), (j, k1), -w);
                add(&mut stencil, (j, k1), (j, k), -w);
                // mixed term at the cell corner
                let c12 = point_coefficients(ext, phi_f, theta_f)?.c12;
                if c12 != 0.0 {
                    let nodes = [(j, k), (j, k1), (j + 1, k), (j + 1, k1)];
                    let p = [-1.0, -1.0, 1.0, 1.0];
                    let q = [-1.0, 1.0, -1.0, 1.0];
                    for a in 0..4 {
                        for b in 0..4 {
                            add(&mut stencil, nodes[a], nodes[b], 0.25 * c12 * (p[a] * q[b] + q[a] * p[b]));
                        }
                    }
                }
            }
        }
        Ok(Self { grid, stencil, mass })
    }

    /// y = (K − σM)x
    pub fn apply(&self, sigma: f64, x: &[f64], y: &mut [f64]) {
        let (np, nt) = (self.grid.n_phi, self.grid.n_theta);
        for j in 0..np {
            for k in 0..nt {
                let i = j * nt + k;
                let st = &self.stencil[i];
                let km = (k + nt - 1) % nt;
                let kp = (k + 1) % nt;
                let mut acc = (st[4] - sigma * self.mass[i]) * x[i] + st[3] * x[j * nt + km] + st[5] * x[j * nt + kp];
                if j > 0 {
                    let r = (j - 1) * nt;
                    acc += st[0] * x[r + km] + st[1] * x[r + k] + st[2] * x[r + kp];
                }
                if j + 1 < np {
                    let r = (j + 1) * nt;
                    acc += st[6] * x[r + km] + st[7] * x[r + k] + st[8] * x[r + kp];
                }
                y[i] = acc;
            }
        }
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(0.0, x, &mut y);
        dot(x, &y)
    }

    pub fn mass_norm2(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.mass).map(|(v, m)| m * v * v).sum()
    }
}

/// Exact inverse of (K₀ − σM₀) for the unperturbed cap, which is circulant in θ:
/// FFT along θ, one tridiagonal solve per Fourier mode, inverse FFT.
pub(crate) struct Preconditioner {
    grid: PolarGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    blocks: Vec<Tridiag>,
}

impl Preconditioner {
    pub fn new(base: &Operator, sigma: f64) -> Result<Self> {
        let (np, nt) = (base.grid.n_phi, base.grid.n_theta);
        let mut blocks = Vec::with_capacity(nt);
        for q in 0..nt {
            let c = (2.0 * std::f64::consts::PI * q as f64 / nt as f64).cos();
            let mut diag = vec![0.0; np];
            let mut lower = vec![0.0; np];
            let mut upper = vec![0.0; np];
            for j in 0..np {
                let st = &base.stencil[j * nt];
                diag[j] = st[4] - sigma * base.mass[j * nt] + (st[3] + st[5]) * c;
                if j > 0 {
                    lower[j] = st[1];
                }
                if j + 1 < np {
                    upper[j] = st[7];
                }
            }
            blocks.push(Tridiag::factor(&lower, &diag, &upper)?);
        }
        let mut planner = FftPlanner::new();
        Ok(Self { grid: base.grid, forward: planner.plan_fft_forward(nt), inverse: planner.plan_fft_inverse(nt), blocks })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (np, nt) = (self.grid.n_phi, self.grid.n_theta);
        let mut spec = vec![Complex::new(0.0, 0.0); np * nt];
        for j in 0..np {
            let row = &mut spec[j * nt..(j + 1) * nt];
            for k in 0..nt {
                row[k] = Complex::new(r[j * nt + k], 0.0);
            }
            self.forward.process(row);
        }
        let mut re = vec![0.0; np];
        let mut im = vec![0.0; np];
        for q in 0..nt {
            for j in 0..np {
                re[j] = spec[j * nt + q].re;
                im[j] = spec[j * nt + q].im;
            }
            self.blocks[q].solve_in_place(&mut re);
            self.blocks[q].solve_in_place(&mut im);
            for j in 0..np {
                spec[j * nt + q] = Complex::new(re[j], im[j]);
            }
        }
        let scale = 1.0 / nt as f64;
        for j in 0..np {
            let row = &mut spec[j * nt..(j + 1) * nt];
            self.inverse.process(row);
            for k in 0..nt {
                z[j * nt + k] = row[k].re * scale;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DiscreteEigen {
    pub lambda: f64,
    /// M-normalized, nonnegative
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Shift-invert power iteration for K x = λ M x.
pub(crate) fn shift_invert(
    op: &Operator,
    pre: &Preconditioner,
    sigma: f64,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<DiscreteEigen> {
    let n = start.len();
    let mut x = start.to_vec();
    let nrm = op.mass_norm2(&x).sqrt();
    x.iter_mut().for_each(|v| *v /= nrm);
    let mut lambda = op.quadratic(&x);
    let mut b = vec![0.0; n];
    let mut y = vec![0.0; n];
    for it in 1..=cfg.max_outer {
        for i in 0..n {
            b[i] = op.mass[i] * x[i];
            y[i] = x[i] / (lambda - sigma);
        }
        pcg(|v, out| op.apply(sigma, v, out), |r, z| pre.apply(r, z), &b, &mut y, cfg.pcg_rtol, 2000)?;
        let nrm = op.mass_norm2(&y).sqrt();
        for i in 0..n {
            x[i] = y[i] / nrm;
        }
        let new = op.quadratic(&x);
        let change = (new - lambda).abs();
        lambda = new;
        if it >= 2 && change <= cfg.tol * lambda.abs() {
            let mut kx = vec![0.0; n];
            op.apply(0.0, &x, &mut kx);
            let res = (0..n).map(|i| (kx[i] - lambda * op.mass[i] * x[i]).powi(2)).sum::<f64>().sqrt();
            let scale = lambda * (0..n).map(|i| (op.mass[i] * x[i]).powi(2)).sum::<f64>().sqrt();
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            let peak = x.iter().fold(0.0f64, |a, v| a.max(*v));
            let low = x.iter().fold(0.0f64, |a, v| a.min(*v));
            if low < -1e-8 * peak {
                return Err(SpecError::Invariant(format!("first eigenvector changes sign (min {low:e}, max {peak:e})")));
            }
            return Ok(DiscreteEigen { lambda, vector: x, iterations: it, residual: res / scale });
        }
    }
    Err(SpecError::Numerical(format!("shift-invert iteration did not converge in {} steps (λ ≈ {lambda})", cfg.max_outer)))
}

/// Unperturbed cap on a grid: exact λ_ρ, the discrete eigenpair and the preconditioner.
pub(crate) struct Baseline {
    pub lambda_exact: f64,
    pub sigma: f64,
    pub eigen: DiscreteEigen,
    pub pre: Preconditioner,
}

type BaselineKey = (SpaceKind, u64, PolarGrid, u64);

pub(crate) fn baseline(space: SpaceForm, rho: f64, cfg: &SolverConfig) -> Result<Arc<Baseline>> {
    static CACHE: OnceLock<Mutex<HashMap<BaselineKey, Arc<Baseline>>>> = OnceLock::new();
    let key = (space.kind, rho.to_bits(), cfg.grid, cfg.shift_factor.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().unwrap().get(&key) {
        return Ok(b.clone());
    }
    let cap = radial::cap_first_eigenvalue(space, rho)?;
    let sigma = cfg.shift_factor * cap.lambda;
    let ext = harmonic_extension(&BoundaryPerturbation::in_space(space, rho))?;
    let op = Operator::assemble(&ext, cfg.grid)?;
    let pre = Preconditioner::new(&op, sigma)?;
    let u = cap.interpolant();
    let mut start = vec![0.0; cfg.grid.len()];
    for j in 0..cfg.grid.n_phi {
        let v = u.eval(cfg.grid.phi(rho, j));
        for k in 0..cfg.grid.n_theta {
            start[j * cfg.grid.n_theta + k] = v;
        }
    }
    let eigen = shift_invert(&op, &pre, sigma, &start, cfg)?;
    let b = Arc::new(Baseline { lambda_exact: cap.lambda, sigma, eigen, pre });
    cache.lock().unwrap().insert(key, b.clone());
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedEigenResult {
    pub space: SpaceKind,
    pub rho: f64,
    pub grid: PolarGrid,
    pub lambda_omega: f64,
    /// λ₁(B_ρ) on the same grid; the deficit is measured against it
    pub lambda_ball: f64,
    /// λ₁(B_ρ) from the radial solver
    pub lambda_ball_exact: f64,
    pub deficit: f64,
    /// |λ_h − λ_{2h}|/3 when requested
    pub lambda_error_estimate: Option<f64>,
    pub deficit_error_estimate: Option<f64>,
    /// pulled-back eigenfunction on the grid, ∫ m û² = 1
    #[serde(skip)]
    pub u_hat: Vec<f64>,
    pub sym_diff: f64,
    pub efn_dist: f64,
    pub alpha: f64,
    pub pullback_error: f64,
    /// ‖ξ‖²_{H^{1/2}} = ∫|∇h|² + ‖ξ‖²_{L²(∂B_ρ)}
    pub h_half_norm: f64,
    pub h_half_seminorm: f64,
    /// ½δ²λ₁ evaluated on the normal displacement ρξ: ρ²Σ η a² (sphere only)
    pub sv_prediction: Option<f64>,
    /// Σ η a² over degrees ≥ 1 (sphere only)
    pub eta_mode_sum: Option<f64>,
    pub convention: Option<EtaConvention>,
    pub iterations: usize,
    pub residual: f64,
}

fn solve_on(xi: &BoundaryPerturbation, cfg: &SolverConfig) -> Result<(DiscreteEigen, Arc<Baseline>, HarmonicExtension)> {
    let base = baseline(xi.space, xi.rho, cfg)?;
    let ext = harmonic_extension(xi)?;
    if xi.coeffs.is_empty() {
        return Ok((base.eigen.clone(), base, ext));
    }
    let op = Operator::assemble(&ext, cfg.grid)?;
    let eig = shift_invert(&op, &base.pre, base.sigma, &base.eigen.vector, cfg)?;
    Ok((eig, base, ext))
}

/// Mode sum Σ η a² over degrees ≥ 1 and the convention used (sphere only).
pub(crate) fn eta_sum(xi: &BoundaryPerturbation) -> Result<Option<(f64, EtaConvention)>> {
    if xi.space.kind != SpaceKind::Sphere {
        return Ok(None);
    }
    let conv = dtn::calibrated_convention()?;
    let mut s = 0.0;
    for (&(k, _), &a) in &xi.coeffs {
        if k > 0 {
            s += dtn::dtn_eigenvalue_with(xi.n(), xi.rho, k, conv)? * a * a;
        }
    }
    Ok(Some((s, conv)))
}

/// First eigenvalue of Ω_ξ via the pulled-back problem on B_ρ, with distances.
pub fn perturbed_eigenvalue(xi: &BoundaryPerturbation, cfg: &SolverConfig) -> Result<PerturbedEigenResult> {
    check_smallness(xi)?;
    let rho = xi.space.check_radius(xi.rho)?;
    if rho != xi.rho {
        return Err(SpecError::Domain("radius too close to the admissible bounds".into()));
    }
    let (eig, base, ext) = solve_on(xi, cfg)?;
    let deficit = eig.lambda - base.eigen.lambda;
    let (lambda_error_estimate, deficit_error_estimate) = if cfg.error_estimate {
        let coarse = SolverConfig { grid: cfg.grid.coarsened(), ..*cfg };
        let (e2, b2, _) = solve_on(xi, &coarse)?;
        let d2 = e2.lambda - b2.eigen.lambda;
        (Some((eig.lambda - e2.lambda).abs() / 3.0), Some((deficit - d2).abs() / 3.0))
    } else {
        (None, None)
    };
    let dist = eigenfunction_distance(xi, &ext, cfg.grid, &eig.vector, &base.eigen.vector)?;
    let l2: f64 = xi.coeffs.values().map(|a| a * a).sum();
    let sv = eta_sum(xi)?;
    Ok(PerturbedEigenResult {
        space: xi.space.kind,
        rho,
        grid: cfg.grid,
        lambda_omega: eig.lambda,
        lambda_ball: base.eigen.lambda,
        lambda_ball_exact: base.lambda_exact,
        deficit,
        lambda_error_estimate,
        deficit_error_estimate,
        u_hat: eig.vector,
        sym_diff: symmetric_difference(xi)?,
        efn_dist: dist.efn_dist,
        alpha: dist.alpha,
        pullback_error: dist.pullback_error,
        h_half_norm: ext.seminorm + l2,
        h_half_seminorm: ext.seminorm,
        sv_prediction: sv.map(|(s, _)| rho * rho * s),
        eta_mode_sum: sv.map(|(s, _)| s),
        convention: sv.map(|(_, c)| c),
        iterations: eig.iterations,
        residual: eig.residual,
    })
}
