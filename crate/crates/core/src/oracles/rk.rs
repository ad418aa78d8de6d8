//! Adaptive Dormand-Prince 5(4) integrator over complex state vectors.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::C64;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("dimension {dim} exceeds the configured limit {limit}")]
    DimOverLimit { dim: usize, limit: usize },
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("step budget exhausted at t = {0}")]
    MaxStepsExceeded(f64),
    #[error("time grid must be sorted")]
    UnsortedGrid,
}

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, max_steps: 50_000_000 }
    }
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// b5 - b4, applied to stages 1..7 for the embedded error estimate
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Integrate dy/dt = rhs(t, y) from t0 through every grid point (sorted,
/// >= t0), invoking `on_grid(index, y)` exactly at each one.
pub fn integrate_rk45<F, G>(
    mut rhs: F,
    mut y: Vec<C64>,
    t0: f64,
    grid: &[f64],
    opts: &RkOptions,
    mut on_grid: G,
) -> Result<(), OracleError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    G: FnMut(usize, &[C64]),
{
    if grid.windows(2).any(|w| w[0] > w[1]) || grid.first().is_some_and(|&g| g < t0) {
        return Err(OracleError::UnsortedGrid);
    }
    let dim = y.len();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![Complex64::new(0.0, 0.0); dim]).collect();
    let mut ytmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut ynew = vec![Complex64::new(0.0, 0.0); dim];

    let span = grid.last().map_or(0.0, |&g| g - t0);
    let mut t = t0;
    let mut h = (span / 100.0).max(1e-10);
    let mut steps = 0usize;
    let mut k1_fresh = false;

    for (gi, &target) in grid.iter().enumerate() {
        while t < target {
            if steps >= opts.max_steps {
                return Err(OracleError::MaxStepsExceeded(t));
            }
            steps += 1;
            let h_step = h.min(target - t);
            if h_step < 1e-15 * span.max(1.0) {
                return Err(OracleError::StepSizeUnderflow(t));
            }

            if !k1_fresh {
                rhs(t, &y, &mut k[0]);
            }
            stage(&y, &k, &A2, h_step, &mut ytmp);
            rhs(t + C[0] * h_step, &ytmp, &mut k[1]);
            stage(&y, &k, &A3, h_step, &mut ytmp);
            rhs(t + C[1] * h_step, &ytmp, &mut k[2]);
            stage(&y, &k, &A4, h_step, &mut ytmp);
            rhs(t + C[2] * h_step, &ytmp, &mut k[3]);
            stage(&y, &k, &A5, h_step, &mut ytmp);
            rhs(t + C[3] * h_step, &ytmp, &mut k[4]);
            stage(&y, &k, &A6, h_step, &mut ytmp);
            rhs(t + C[4] * h_step, &ytmp, &mut k[5]);
            stage(&y, &k, &B5, h_step, &mut ynew);
            rhs(t + h_step, &ynew, &mut k[6]);

            // embedded error estimate
            let mut err_sq = 0.0f64;
            for i in 0..dim {
                let mut e = Complex64::new(0.0, 0.0);
                for (s, &w) in ERR.iter().enumerate() {
                    if w != 0.0 {
                        e += k[s][i] * w;
                    }
                }
                let e = (e * h_step).norm();
                let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(ynew[i].norm());
                err_sq += (e / scale) * (e / scale);
            }
            let err = (err_sq / dim as f64).sqrt();

            if err <= 1.0 {
                t += h_step;
                std::mem::swap(&mut y, &mut ynew);
                // first-same-as-last: k7 of the accepted step is k1 at t
                k.swap(0, 6);
                k1_fresh = true;
            } else {
                k1_fresh = false;
            }
            let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
            h = h_step * factor.clamp(0.2, 5.0);
        }
        on_grid(gi, &y);
    }
    Ok(())
}

fn stage(y: &[C64], k: &[Vec<C64>], coeffs: &[f64], h: f64, out: &mut [C64]) {
    out.copy_from_slice(y);
    for (s, &a) in coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let ah = a * h;
        for (o, &kv) in out.iter_mut().zip(&k[s]) {
            *o += kv * ah;
        }
    }
}
