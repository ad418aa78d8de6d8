//! Fully dense model: explicit channel operator pairs A_alpha (x) B_alpha(t)
//! on small Hilbert spaces. Slow but representation-complete; used to check
//! the engine against the dense reference integrator and to drive the
//! `custom_small` runs.

use ndarray::Array2;
use num_complex::Complex64;

use crate::linalg::{kron, C64};
use crate::pdp::{EnvState, PdpError, PdpModel, WaitingTime};
use crate::state::{inner_product, StateVector};

/// Dense environment vector with a log-space scale so the drift cannot
/// overflow the amplitudes.
#[derive(Debug, Clone)]
pub struct DenseEnv {
    pub amps: StateVector,
    pub log_scale: f64,
}

impl DenseEnv {
    pub fn new(amps: StateVector) -> Self {
        Self { amps, log_scale: 0.0 }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self::new(StateVector::basis(dim, i))
    }

    /// Dense amplitudes including the scale factor; overflows for large
    /// drift exponents, intended for small test horizons.
    pub fn to_dense(&self) -> Vec<C64> {
        let s = self.log_scale.exp();
        self.amps.amps().iter().map(|z| z * s).collect()
    }
}

impl EnvState for DenseEnv {
    fn log_norm(&self) -> f64 {
        self.log_scale + self.amps.norm().ln()
    }

    fn scale_log(&mut self, dlog: f64) {
        self.log_scale += dlog;
    }
}

/// <chi_2 | chi_1> including both scale factors.
pub fn dense_overlap(chi1: &DenseEnv, chi2: &DenseEnv) -> C64 {
    let scale = (chi1.log_scale + chi2.log_scale).exp();
    inner_product(&chi2.amps, &chi1.amps).expect("environment dims must match") * scale
}

/// One interaction channel A (x) B e^{i freq t}.
#[derive(Debug, Clone)]
pub struct DenseChannel {
    pub a: Array2<C64>,
    pub b: Array2<C64>,
    pub freq: f64,
}

#[derive(Debug, Clone)]
pub struct DenseModel {
    pub channels: Vec<DenseChannel>,
    dim_s: usize,
    dim_e: usize,
}

impl DenseModel {
    pub fn new(channels: Vec<DenseChannel>) -> Self {
        assert!(!channels.is_empty());
        let dim_s = channels[0].a.nrows();
        let dim_e = channels[0].b.nrows();
        for ch in &channels {
            assert_eq!(ch.a.dim(), (dim_s, dim_s));
            assert_eq!(ch.b.dim(), (dim_e, dim_e));
        }
        Self { channels, dim_s, dim_e }
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    /// H_I(t) = sum_alpha A_alpha (x) B_alpha e^{i freq_alpha t} as a dense
    /// matrix for the reference integrator.
    pub fn hamiltonian(&self, t: f64) -> Array2<C64> {
        let dim = self.dim_s * self.dim_e;
        let mut h = Array2::zeros((dim, dim));
        for ch in &self.channels {
            let phase = C64::from_polar(1.0, ch.freq * t);
            let term = kron(ch.a.view(), ch.b.view());
            h += &term.mapv(|z| z * phase);
        }
        h
    }

    /// Two-state system exchanging one excitation with a single truncated
    /// bosonic mode: H = g (sigma_+ b e^{i delta t} + h.c.).
    pub fn single_mode(g: f64, delta: f64, mode_dim: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let mut sigma_plus = Array2::from_elem((2, 2), zero);
        sigma_plus[(0, 1)] = one;
        let mut sigma_minus = Array2::from_elem((2, 2), zero);
        sigma_minus[(1, 0)] = one;
        let mut annihilate = Array2::from_elem((mode_dim, mode_dim), zero);
        for n in 1..mode_dim {
            annihilate[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        let create = crate::linalg::dagger(annihilate.view());
        let scale = C64::new(g, 0.0);
        DenseModel::new(vec![
            DenseChannel { a: sigma_plus, b: annihilate.mapv(|z| z * scale), freq: delta },
            DenseChannel { a: sigma_minus, b: create.mapv(|z| z * scale), freq: -delta },
        ])
    }
}

impl PdpModel for DenseModel {
    type Env = DenseEnv;

    fn channel_count(&self) -> usize {
        self.channels.len()
    }

    fn rate_factors(&self, alpha: usize, psi: &StateVector, env: &DenseEnv, _t: f64) -> (f64, f64) {
        let ch = &self.channels[alpha];
        let apsi = psi.apply(ch.a.view()).expect("system dim");
        let bchi = env.amps.apply(ch.b.view()).expect("environment dim");
        (apsi.norm() / psi.norm(), bchi.norm() / env.amps.norm())
    }

    fn integrated_total_rate(&self, psi: &StateVector, env: &DenseEnv, t: f64, dt: f64) -> f64 {
        // The channel phases drop out of the norms: rates are constant
        // between jumps.
        self.total_rate(psi, env, t) * dt
    }

    fn invert_waiting_time(
        &self,
        psi: &StateVector,
        env: &DenseEnv,
        t: f64,
        target: f64,
    ) -> Option<Result<WaitingTime, PdpError>> {
        let rate = self.total_rate(psi, env, t);
        Some(if rate <= 0.0 {
            Ok(WaitingTime::Infinite)
        } else {
            Ok(WaitingTime::Finite(target / rate))
        })
    }

    fn apply_jump(
        &self,
        alpha: usize,
        psi: &mut StateVector,
        env: &mut DenseEnv,
        t: f64,
    ) -> Result<(), PdpError> {
        let ch = &self.channels[alpha];
        let apsi = psi.apply(ch.a.view()).expect("system dim");
        let an = apsi.norm();
        if an == 0.0 {
            return Err(PdpError::AnnihilatingJump(alpha));
        }
        let mut new_psi = apsi;
        new_psi.scale(C64::new(0.0, -1.0) * (psi.norm() / an));
        *psi = new_psi;

        let mut bchi = env.amps.apply(ch.b.view()).expect("environment dim");
        let bn = bchi.norm();
        if bn == 0.0 {
            return Err(PdpError::AnnihilatingJump(alpha));
        }
        bchi.scale(C64::from_polar(env.amps.norm() / bn, ch.freq * t));
        env.amps = bchi;
        Ok(())
    }
}
