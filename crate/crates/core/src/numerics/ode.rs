use crate::error::{Result, SpecError};

/// Tolerances for the adaptive Dormand-Prince integrator.
#[derive(Debug, Clone, Copy)]
pub struct OdeTol {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OdeTol {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Integrates `y' = f(t, y)` from `t0` to `t1` with adaptive DOPRI5 steps.
pub fn integrate<const N: usize, F>(f: &mut F, t0: f64, y0: [f64; N], t1: f64, tol: OdeTol) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() * 1e-3).max(1e-12);
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    for _ in 0..2_000_000 {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut ynew = y;
        for i in 0..N {
            ynew[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
        }
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(SpecError::Numerical(format!("ODE state became non-finite at t = {t}")));
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
            k[0] = k[6];
            if (t1 - t).abs() <= 1e-15 * t1.abs().max(1.0) {
                return Ok(y);
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < 1e-14 * t.abs().max(1e-6) {
            return Err(SpecError::Numerical(format!("ODE step size underflow at t = {t}")));
        }
    }
    Err(SpecError::Numerical("ODE step budget exhausted".into()))
}

/// Integrates through an increasing list of output nodes, returning the state at each.
pub fn integrate_nodes<const N: usize, F>(f: &mut F, t0: f64, y0: [f64; N], nodes: &[f64], tol: OdeTol) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(nodes.len());
    let (mut t, mut y) = (t0, y0);
    for &tn in nodes {
        y = integrate(f, t, y, tn, tol)?;
        t = tn;
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let mut f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = integrate(&mut f, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, OdeTol::default()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn nodes_match_closed_form() {
        let mut f = |_t: f64, y: &[f64; 1]| [y[0]];
        let nodes = [0.5, 1.0, 2.0];
        let ys = integrate_nodes(&mut f, 0.0, [1.0], &nodes, OdeTol::default()).unwrap();
        for (t, y) in nodes.iter().zip(ys) {
            assert!((y[0] - t.exp()).abs() < 1e-10 * t.exp());
        }
    }
}
