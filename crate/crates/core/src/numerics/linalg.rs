use crate::error::{Result, SpecError};

/// Factored tridiagonal matrix (Thomas algorithm, no pivoting; intended for
/// diagonally dominant or SPD systems).
#[derive(Debug, Clone)]
pub struct Tridiag {
    lower: Vec<f64>,
    cprime: Vec<f64>,
    denom: Vec<f64>,
}

impl Tridiag {
    /// `lower[i]` couples row i to i-1, `diag[i]` is the diagonal, `upper[i]` couples i to i+1.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut cprime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        for i in 0..n {
            let d = diag[i] - if i > 0 { lower[i] * cprime[i - 1] } else { 0.0 };
            if d.abs() < 1e-300 {
                return Err(SpecError::Numerical("singular tridiagonal system".into()));
            }
            denom[i] = d;
            cprime[i] = if i + 1 < n { upper[i] / d } else { 0.0 };
        }
        Ok(Self { lower: lower.to_vec(), cprime, denom })
    }

    pub fn solve_in_place(&self, d: &mut [f64]) {
        let n = d.len();
        for i in 0..n {
            let prev = if i > 0 { self.lower[i] * d[i - 1] } else { 0.0 };
            d[i] = (d[i] - prev) / self.denom[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= self.cprime[i] * d[i + 1];
        }
    }
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(SpecError::Numerical("singular dense system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(r);
            for (x, &p) in bottom[0][col..n].iter_mut().zip(&top[col][col..n]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a preconditioned conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct PcgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Preconditioned conjugate gradients for an SPD operator.
pub fn pcg<A, P>(apply: A, precond: P, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> Result<PcgStats>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(PcgStats { iterations: 0, rel_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rn = dot(&r, &r).sqrt() / bnorm;
        if rn <= rtol {
            return Ok(PcgStats { iterations: it, rel_residual: rn });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SpecError::Numerical(format!("operator not positive definite (pAp = {pap:e})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = dot(&r, &r).sqrt() / bnorm;
    Err(SpecError::Numerical(format!("PCG did not converge in {max_iter} iterations (relative residual {rn:e})")))
}
