//! Independent reference solutions: dense unitary evolution of the composite
//! density matrix, the two-amplitude reduction of the bosonic decay problem,
//! and closed-form spin-bath expressions.

mod rk;

pub use rk::{integrate_rk45, OracleError, RkOptions};

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::linalg::{matmul, C64};
use crate::models::jc::BathCorrelation;
use crate::models::spin::{self, SpinBathParams};

#[derive(Debug, Clone, Copy)]
pub struct VonNeumannOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Refuse matrices larger than this (memory/time guard).
    pub dim_limit: usize,
    pub max_steps: usize,
}

impl Default for VonNeumannOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, dim_limit: 512, max_steps: 50_000_000 }
    }
}

/// Integrate d rho/dt = -i [H(t), rho] on `grid`, returning rho at each grid
/// time. `rho0` need not be Hermitian; any matrix-valued initial block
/// evolves under the same unitary similarity.
pub fn integrate_von_neumann(
    h: &dyn Fn(f64) -> Array2<C64>,
    rho0: ArrayView2<C64>,
    grid: &[f64],
    opts: &VonNeumannOptions,
) -> Result<Vec<Array2<C64>>, OracleError> {
    let dim = rho0.nrows();
    if dim > opts.dim_limit {
        return Err(OracleError::DimOverLimit { dim, limit: opts.dim_limit });
    }
    let y0: Vec<C64> = rho0.iter().cloned().collect();
    let mut out = Vec::with_capacity(grid.len());
    let rk = RkOptions { rel_tol: opts.rel_tol, abs_tol: opts.abs_tol, max_steps: opts.max_steps };
    integrate_rk45(
        |t, y, dy| {
            let rho = ArrayView2::from_shape((dim, dim), y).unwrap();
            let ht = h(t);
            let mut hr = matmul(ht.view(), rho);
            let rh = matmul(rho, ht.view());
            hr -= &rh;
            for (d, v) in dy.iter_mut().zip(hr.iter()) {
                *d = C64::new(0.0, -1.0) * v;
            }
        },
        y0,
        0.0,
        grid,
        &rk,
        |_, y| {
            out.push(Array2::from_shape_vec((dim, dim), y.to_vec()).unwrap());
        },
    )?;
    Ok(out)
}

/// Reference curves for the bosonic decay model through the equivalent
/// two-amplitude system forced by the exponential kernel:
/// dc1/dt = -i b, db/dt = -(lambda - i delta) b - i f(0) c1.
/// p(t) = |c1|^2 and the lowering correlation is conj(c1).
#[derive(Debug, Clone)]
pub struct JcReference {
    pub grid: Vec<f64>,
    pub amplitude: Vec<C64>,
    pub p: Vec<f64>,
    pub c: Vec<C64>,
}

pub fn jc_reference(bath: &BathCorrelation, grid: &[f64]) -> Result<JcReference, OracleError> {
    let f0 = bath.f0();
    let decay = C64::new(bath.lambda, -bath.delta);
    let mut amplitude = Vec::with_capacity(grid.len());
    integrate_rk45(
        |_t, y, dy| {
            dy[0] = C64::new(0.0, -1.0) * y[1];
            dy[1] = -decay * y[1] + C64::new(0.0, -f0) * y[0];
        },
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        0.0,
        grid,
        &RkOptions { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() },
        |_, y| amplitude.push(y[0]),
    )?;
    let p = amplitude.iter().map(|a| a.norm_sqr()).collect();
    let c = amplitude.iter().map(|a| a.conj()).collect();
    Ok(JcReference { grid: grid.to_vec(), amplitude, p, c })
}

/// Brute-force cross-check of [`jc_reference`]: the reservoir discretized
/// into `n_modes` modes over detuning offsets delta +- half_span*lambda,
/// integrated as a dense matrix equation in the one-excitation sector.
pub fn jc_mode_expansion(
    bath: &BathCorrelation,
    grid: &[f64],
    n_modes: usize,
    half_span: f64,
) -> Result<Vec<f64>, OracleError> {
    let dim = n_modes + 1;
    let width = half_span * bath.lambda;
    let d_delta = 2.0 * width / n_modes as f64;
    // offsets delta_k = (omega0 - omega_k), couplings from the spectral density
    let offsets: Vec<f64> = (0..n_modes)
        .map(|k| bath.delta - width + (k as f64 + 0.5) * d_delta)
        .collect();
    let couplings: Vec<f64> = offsets
        .iter()
        .map(|&d| {
            let j = bath.gamma0 * bath.lambda * bath.lambda
                / (2.0 * std::f64::consts::PI * ((d - bath.delta).powi(2) + bath.lambda.powi(2)));
            (j * d_delta).sqrt()
        })
        .collect();

    let h = move |t: f64| {
        let mut m = Array2::zeros((dim, dim));
        for k in 0..n_modes {
            let g = couplings[k] * C64::from_polar(1.0, offsets[k] * t);
            m[(0, k + 1)] = g;
            m[(k + 1, 0)] = g.conj();
        }
        m
    };
    let mut rho0 = Array2::zeros((dim, dim));
    rho0[(0, 0)] = C64::new(1.0, 0.0);
    let opts = VonNeumannOptions { dim_limit: dim.max(512), rel_tol: 1e-8, ..Default::default() };
    let rhos = integrate_von_neumann(&h, rho0.view(), grid, &opts)?;
    Ok(rhos.iter().map(|r| r[(0, 0)].re).collect())
}

/// Dense product-basis Hamiltonian of the central-spin model,
/// H(t) = D + e^{i w0 t} P + e^{-i w0 t} P^dag with D the sigma_3 (x) B_3
/// part and P = sigma_+ (x) B_-(0). Basis index: s * 2^N + b with s = 0 the
/// up central spin and bath bit j set meaning spin j down.
pub struct SpinDenseHamiltonian {
    pub dim: usize,
    diag: Vec<f64>,
    p: Array2<C64>,
    omega0: f64,
}

impl SpinDenseHamiltonian {
    pub fn new(params: &SpinBathParams) -> Self {
        let n = params.n_spins;
        let nb = 1usize << n;
        let dim = 2 * nb;
        let per_spin = params.coupling / (n as f64).sqrt();
        let mut diag = vec![0.0f64; dim];
        for s in 0..2usize {
            let s3 = if s == 0 { 1.0 } else { -1.0 };
            for b in 0..nb {
                let mut bath3 = 0.0;
                for j in 0..n {
                    bath3 += if b >> j & 1 == 0 { 1.0 } else { -1.0 };
                }
                diag[s * nb + b] = s3 * per_spin * bath3;
            }
        }
        let mut p = Array2::zeros((dim, dim));
        let flip = 2.0 * per_spin;
        for b in 0..nb {
            for j in 0..n {
                if b >> j & 1 == 0 {
                    // sigma_-^{(j)} lowers bath spin j: |...up_j...> -> |...down_j...>
                    let b_after = b | (1 << j);
                    p[(b_after, nb + b)] = C64::new(flip, 0.0);
                }
            }
        }
        Self { dim, diag, p, omega0: params.omega0 }
    }

    pub fn at(&self, t: f64) -> Array2<C64> {
        let mut h = Array2::zeros((self.dim, self.dim));
        let phase = C64::from_polar(1.0, self.omega0 * t);
        for ((i, j), &v) in self.p.indexed_iter() {
            if v.re != 0.0 || v.im != 0.0 {
                h[(i, j)] = v * phase;
                h[(j, i)] = (v * phase).conj();
            }
        }
        for i in 0..self.dim {
            h[(i, i)] = C64::new(self.diag[i], 0.0);
        }
        h
    }
}

/// Exact coherence of the central spin by dense evolution of the
/// |+><-| (x) I/2^N block; feasible up to N = 8 at the default limit.
pub fn spin_coherence_reference(
    params: &SpinBathParams,
    grid: &[f64],
    opts: &VonNeumannOptions,
) -> Result<Vec<C64>, OracleError> {
    let n = params.n_spins;
    let nb = 1usize << n;
    let dim = 2 * nb;
    if dim > opts.dim_limit {
        return Err(OracleError::DimOverLimit { dim, limit: opts.dim_limit });
    }
    let ham = SpinDenseHamiltonian::new(params);
    let mut rho0 = Array2::zeros((dim, dim));
    let w = C64::new(1.0 / nb as f64, 0.0);
    for b in 0..nb {
        rho0[(b, nb + b)] = w;
    }
    let rhos = integrate_von_neumann(&|t| ham.at(t), rho0.view(), grid, opts)?;
    Ok(rhos
        .iter()
        .map(|r| (0..nb).map(|b| r[(b, nb + b)]).sum())
        .collect())
}

/// Closed-form spin-bath comparison curves.
#[derive(Debug, Clone, Copy)]
pub struct SpinClosedForms {
    /// [cos(2At/sqrt N)]^N: exact when the flip-flop channels are dropped.
    pub cos_n: f64,
    /// exp(-2 A^2 t^2): its large-N limit.
    pub gaussian: f64,
    /// Second-order time-convolutionless prediction.
    pub tcl2: C64,
}

pub fn spin_closed_forms(params: &SpinBathParams, t: f64) -> SpinClosedForms {
    SpinClosedForms {
        cos_n: spin::dephasing_closed_form(params, t),
        gaussian: spin::dephasing_gaussian(params.coupling, t),
        tcl2: spin::tcl2_coherence(params, t),
    }
}
