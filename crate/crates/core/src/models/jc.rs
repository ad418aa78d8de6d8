//! Damped two-state system decaying into a bosonic reservoir with Lorentzian
//! spectral density (resonant or detuned). The reservoir never leaves the
//! span of the vacuum and single-excitation wave packets, so its state is
//! carried symbolically: a sector tag, a scalar prefactor, and the creation
//! time of the excitation.

use num_complex::Complex64;

use crate::estimators::{
    BranchCoupling, CurveAccumulator, EstimatorKind, FluctuationTracker, RhoAccumulator,
};
use crate::linalg::C64;
use crate::pdp::{
    evolve_branch, BranchSample, EnvState, PdpError, PdpModel, TrajectoryRecord, WaitingTime,
};
use crate::rng::TrajectoryRngs;
use crate::state::{ProductPair, StateVector};

/// Exponential reservoir memory kernel f(t) = (gamma0 lambda / 2)
/// exp(i delta t - lambda |t|).
#[derive(Debug, Clone, Copy)]
pub struct BathCorrelation {
    /// Relaxation rate of the weak-coupling limit.
    pub gamma0: f64,
    /// Inverse reservoir correlation time.
    pub lambda: f64,
    /// Detuning; zero on resonance.
    pub delta: f64,
}

impl BathCorrelation {
    pub fn resonant(gamma0: f64, lambda: f64) -> Self {
        Self { gamma0, lambda, delta: 0.0 }
    }

    pub fn detuned(gamma0: f64, lambda: f64, delta: f64) -> Self {
        Self { gamma0, lambda, delta }
    }

    pub fn f(&self, t: f64) -> C64 {
        let mag = self.f0() * (-self.lambda * t.abs()).exp();
        C64::from_polar(mag, self.delta * t)
    }

    /// f(0) = gamma0 lambda / 2, real and positive.
    pub fn f0(&self) -> f64 {
        0.5 * self.gamma0 * self.lambda
    }

    pub fn abs_f(&self, t: f64) -> f64 {
        self.f0() * (-self.lambda * t.abs()).exp()
    }

    /// Rate while the reservoir is vacuum-proportional: sqrt(f(0)).
    pub fn vacuum_rate(&self) -> f64 {
        self.f0().sqrt()
    }

    /// int_0^tau |f(s)| ds / sqrt(f(0)) = sqrt(gamma0/(2 lambda)) (1 - e^{-lambda tau}).
    pub fn integrated_excited_rate(&self, tau: f64) -> f64 {
        (self.gamma0 / (2.0 * self.lambda)).sqrt() * (-(-self.lambda * tau).exp_m1())
    }

    /// Survival mass of the defective waiting-time law after an odd jump:
    /// q = exp(-sqrt(gamma0 / (2 lambda))).
    pub fn no_jump_probability(&self) -> f64 {
        (-(self.gamma0 / (2.0 * self.lambda)).sqrt()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Vacuum,
    OneParticle,
}

/// Symbolic reservoir state: `prefactor * |0>` in the vacuum sector,
/// `prefactor * B^dag(creation_time)|0> / sqrt(f0)` after an odd jump. The
/// prefactor magnitude lives in log space; its norm is exp(log_mag).
#[derive(Debug, Clone, Copy)]
pub struct ReservoirState {
    sector: Sector,
    creation_time: f64,
    log_mag: f64,
    phase: C64,
}

impl ReservoirState {
    pub fn vacuum() -> Self {
        Self { sector: Sector::Vacuum, creation_time: 0.0, log_mag: 0.0, phase: C64::new(1.0, 0.0) }
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn creation_time(&self) -> f64 {
        self.creation_time
    }

    pub fn prefactor(&self) -> C64 {
        self.phase * self.log_mag.exp()
    }

    pub fn norm(&self) -> f64 {
        self.log_mag.exp()
    }
}

impl EnvState for ReservoirState {
    fn log_norm(&self) -> f64 {
        self.log_mag
    }

    fn scale_log(&mut self, dlog: f64) {
        self.log_mag += dlog;
    }
}

/// <chi_2 | chi_1> in the symbolic representation. Mixed sectors are
/// orthogonal; two single-excitation states overlap through the kernel,
/// <0| B(t_2) B^dag(t_1) |0> / f(0) = f(t_2 - t_1) / f(0).
pub fn overlap(bath: &BathCorrelation, chi1: &ReservoirState, chi2: &ReservoirState) -> C64 {
    let pref = chi2.prefactor().conj() * chi1.prefactor();
    match (chi1.sector, chi2.sector) {
        (Sector::Vacuum, Sector::Vacuum) => pref,
        (Sector::OneParticle, Sector::OneParticle) => {
            pref * bath.f(chi2.creation_time - chi1.creation_time) / bath.f0()
        }
        _ => C64::new(0.0, 0.0),
    }
}

/// Channel indices: 0 raises the system and absorbs the excitation
/// (A = sigma_+, B), 1 lowers the system and emits one (A = sigma_-, B^dag).
pub const CHANNEL_ABSORB: usize = 0;
pub const CHANNEL_EMIT: usize = 1;

/// System basis: index 0 = excited, 1 = ground.
pub const EXCITED: usize = 0;
pub const GROUND: usize = 1;

#[derive(Debug, Clone, Copy)]
pub struct JcModel {
    pub bath: BathCorrelation,
}

impl JcModel {
    pub fn new(bath: BathCorrelation) -> Self {
        Self { bath }
    }

    fn unsupported(&self) -> PdpError {
        PdpError::Model(
            "excited-system amplitude on a one-particle reservoir leaves the \
             two-sector representation"
                .into(),
        )
    }
}

impl PdpModel for JcModel {
    type Env = ReservoirState;

    fn channel_count(&self) -> usize {
        2
    }

    fn rate_factors(
        &self,
        alpha: usize,
        psi: &StateVector,
        env: &ReservoirState,
        t: f64,
    ) -> (f64, f64) {
        let norm = psi.norm();
        let sys = match alpha {
            CHANNEL_ABSORB => psi.amps()[GROUND].norm() / norm,
            CHANNEL_EMIT => psi.amps()[EXCITED].norm() / norm,
            _ => panic!("channel {alpha} out of range"),
        };
        let f0 = self.bath.f0();
        let envf = match (alpha, env.sector) {
            (CHANNEL_ABSORB, Sector::Vacuum) => 0.0,
            (CHANNEL_ABSORB, Sector::OneParticle) => {
                self.bath.abs_f(t - env.creation_time) / f0.sqrt()
            }
            (CHANNEL_EMIT, Sector::Vacuum) => f0.sqrt(),
            (CHANNEL_EMIT, Sector::OneParticle) => {
                // |B^dag(t) B^dag(t_c)|0>|^2 = f(0)^2 + |f(t - t_c)|^2
                let fabs = self.bath.abs_f(t - env.creation_time);
                (f0 * f0 + fabs * fabs).sqrt() / f0.sqrt()
            }
            _ => unreachable!(),
        };
        (sys, envf)
    }

    fn integrated_total_rate(
        &self,
        psi: &StateVector,
        env: &ReservoirState,
        t: f64,
        dt: f64,
    ) -> f64 {
        let norm = psi.norm();
        match env.sector {
            Sector::Vacuum => {
                let rate = psi.amps()[EXCITED].norm() / norm * self.bath.vacuum_rate();
                rate * dt
            }
            Sector::OneParticle => {
                let sys = psi.amps()[GROUND].norm() / norm;
                let u0 = t - env.creation_time;
                sys * (self.bath.integrated_excited_rate(u0 + dt)
                    - self.bath.integrated_excited_rate(u0))
            }
        }
    }

    fn invert_waiting_time(
        &self,
        psi: &StateVector,
        env: &ReservoirState,
        t: f64,
        target: f64,
    ) -> Option<Result<WaitingTime, PdpError>> {
        let norm = psi.norm();
        let excited_amp = psi.amps()[EXCITED].norm() / norm;
        let ground_amp = psi.amps()[GROUND].norm() / norm;
        Some(match env.sector {
            Sector::Vacuum => {
                let rate = excited_amp * self.bath.vacuum_rate();
                if rate <= 0.0 {
                    Ok(WaitingTime::Infinite)
                } else {
                    Ok(WaitingTime::Finite(target / rate))
                }
            }
            Sector::OneParticle => {
                if excited_amp > 0.0 {
                    return Some(Err(self.unsupported()));
                }
                let u0 = t - env.creation_time;
                let lambda = self.bath.lambda;
                let k = (self.bath.gamma0 / (2.0 * lambda)).sqrt();
                // remaining exponent from u0 to infinity
                let remaining = ground_amp * k * (-lambda * u0).exp();
                if target >= remaining {
                    Ok(WaitingTime::Infinite)
                } else {
                    let tau = -(-target / remaining).ln_1p() / lambda;
                    Ok(WaitingTime::Finite(tau))
                }
            }
        })
    }

    fn apply_jump(
        &self,
        alpha: usize,
        psi: &mut StateVector,
        env: &mut ReservoirState,
        t: f64,
    ) -> Result<(), PdpError> {
        let norm = psi.norm();
        match alpha {
            CHANNEL_EMIT => {
                if env.sector != Sector::Vacuum {
                    return Err(self.unsupported());
                }
                let amp = psi.amps()[EXCITED];
                if amp.norm() == 0.0 {
                    return Err(PdpError::AnnihilatingJump(alpha));
                }
                // psi -> -i (|psi| / |sigma_- psi|) sigma_- psi
                let new_g = C64::new(0.0, -1.0) * amp * (norm / amp.norm());
                psi.amps_mut()[EXCITED] = C64::new(0.0, 0.0);
                psi.amps_mut()[GROUND] = new_g;
                env.sector = Sector::OneParticle;
                env.creation_time = t;
            }
            CHANNEL_ABSORB => {
                if env.sector != Sector::OneParticle {
                    return Err(PdpError::AnnihilatingJump(alpha));
                }
                let amp = psi.amps()[GROUND];
                if amp.norm() == 0.0 {
                    return Err(PdpError::AnnihilatingJump(alpha));
                }
                let new_e = C64::new(0.0, -1.0) * amp * (norm / amp.norm());
                psi.amps_mut()[GROUND] = C64::new(0.0, 0.0);
                psi.amps_mut()[EXCITED] = new_e;
                // Back to the vacuum sector with the kernel phase f/|f|.
                let tau = t - env.creation_time;
                let f = self.bath.f(tau);
                env.phase *= f / f.norm();
                env.sector = Sector::Vacuum;
            }
            _ => panic!("channel {alpha} out of range"),
        }
        Ok(())
    }
}

/// Observables sampled from an ensemble of trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcObservable {
    /// p(t) = E(<e|psi_1><psi_2|e><chi_2|chi_1>) from the sharp initial state
    /// |e> (x) |0>.
    ExcitedPopulation,
    /// c(t) = <sigma_+(t) sigma_-(0)> with the free phase stripped: branch 1
    /// starts from sigma_- |e> (x) |0>.
    LoweringCorrelation,
}

#[derive(Debug, Clone, Copy)]
pub struct JcRunOptions {
    pub n_traj: u64,
    pub seed: u64,
    /// Trajectories per deterministic work batch.
    pub batch: u64,
    /// Also accumulate the reduced density matrix.
    pub with_rho: bool,
}

impl Default for JcRunOptions {
    fn default() -> Self {
        Self { n_traj: 10_000, seed: 1, batch: 1024, with_rho: false }
    }
}

/// Accumulated results of one ensemble.
#[derive(Debug, Clone)]
pub struct JcEnsemble {
    pub curve: CurveAccumulator,
    pub fluct: FluctuationTracker,
    pub rho: Option<Vec<RhoAccumulator>>,
    pub n_traj: u64,
}

impl JcEnsemble {
    fn new(grid: &[f64], bath: &BathCorrelation, with_rho: bool) -> Self {
        Self {
            curve: CurveAccumulator::new(grid.to_vec(), BranchCoupling::Independent),
            // sharp pure initial state: tr rho^2 = 1, D^2(0) = 0; the rates
            // never exceed sqrt(f(0)).
            fluct: FluctuationTracker::new(grid.to_vec(), bath.vacuum_rate(), 1.0, 0.0),
            rho: with_rho.then(|| grid.iter().map(|_| RhoAccumulator::new(2)).collect()),
            n_traj: 0,
        }
    }

    fn merge(&mut self, other: &JcEnsemble) {
        self.curve.merge(&other.curve);
        self.fluct.merge(&other.fluct);
        if let (Some(a), Some(b)) = (self.rho.as_mut(), other.rho.as_ref()) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        self.n_traj += other.n_traj;
    }
}

/// Amplitude <i, 0 | Phi> of a branch sample: system component i times the
/// vacuum prefactor (zero in the one-particle sector).
fn vacuum_amplitude(sample: &BranchSample<'_, ReservoirState>, sys_index: usize) -> C64 {
    if sample.dead || sample.env.sector() != Sector::Vacuum {
        return C64::new(0.0, 0.0);
    }
    sample.psi.amps()[sys_index] * sample.env.prefactor()
}

struct BranchShot {
    amp: C64,
    log_norm: f64,
    sys: [C64; 2],
    env: ReservoirState,
}

/// Run one ensemble of the bosonic-decay model on `grid`, accumulating both
/// estimator inputs per grid point plus fluctuation samples.
pub fn run_ensemble(
    model: &JcModel,
    observable: JcObservable,
    grid: &[f64],
    opts: &JcRunOptions,
) -> Result<JcEnsemble, PdpError> {
    let bath = model.bath;
    let with_rho = opts.with_rho;
    let make = || JcEnsemble::new(grid, &bath, with_rho);
    let a_sys_index = match observable {
        JcObservable::ExcitedPopulation => EXCITED,
        JcObservable::LoweringCorrelation => GROUND,
    };

    crate::ensemble::parallel_fold(
        opts.n_traj,
        opts.batch,
        make,
        |acc: &mut JcEnsemble, traj_idx: u64| -> Result<(), PdpError> {
            let rngs = TrajectoryRngs::new(opts.seed, traj_idx);
            let mut shots1: Vec<BranchShot> = Vec::with_capacity(grid.len());
            let mut shots2: Vec<BranchShot> = Vec::with_capacity(grid.len());

            let psi_initial = |branch: usize| {
                if branch == 0 && observable == JcObservable::LoweringCorrelation {
                    // Y(0)|Phi_1(0)> = sigma_- |e> (x) |0>
                    StateVector::basis(2, GROUND)
                } else {
                    StateVector::basis(2, EXCITED)
                }
            };

            for branch in 0..2 {
                let shots = if branch == 0 { &mut shots1 } else { &mut shots2 };
                let sys_index = if branch == 0 { a_sys_index } else { EXCITED };
                let mut rng = rngs.branch[branch].rng();
                evolve_branch(
                    model,
                    psi_initial(branch),
                    ReservoirState::vacuum(),
                    0.0,
                    *grid.last().expect("empty grid"),
                    grid,
                    &mut rng,
                    |_, s| {
                        shots.push(BranchShot {
                            amp: vacuum_amplitude(s, sys_index),
                            log_norm: s.env.log_norm() + s.psi.norm().ln(),
                            sys: [s.psi.amps()[0], s.psi.amps()[1]],
                            env: s.env,
                        });
                    },
                )?;
            }

            for (idx, (s1, s2)) in shots1.iter().zip(&shots2).enumerate() {
                acc.curve.push(idx, s1.amp, s2.amp);
                acc.fluct.push_log_norms(idx, s1.log_norm, s2.log_norm);
                if let Some(rho) = acc.rho.as_mut() {
                    rho[idx].push(&s1.sys, &s2.sys, overlap(&bath, &s1.env, &s2.env));
                }
            }
            acc.n_traj += 1;
            Ok(())
        },
        |acc: &mut JcEnsemble, other: &JcEnsemble| acc.merge(other),
    )
}

/// Convenience wrapper returning a full trajectory record for one pair from
/// the sharp initial state, for inspection and tests.
pub fn sample_trajectory(
    model: &JcModel,
    t_final: f64,
    seed: u64,
    traj: u64,
) -> Result<TrajectoryRecord<ReservoirState>, PdpError> {
    let pair = ProductPair::new(
        StateVector::basis(2, EXCITED),
        ReservoirState::vacuum(),
        StateVector::basis(2, EXCITED),
        ReservoirState::vacuum(),
    );
    let rngs = TrajectoryRngs::new(seed, traj);
    let (record, _) = crate::pdp::evolve_pair(model, pair, t_final, &[], &rngs)?;
    Ok(record)
}

/// Point-in-time curve of either observable with the chosen estimator.
pub fn ensemble_curve(
    ens: &JcEnsemble,
    kind: EstimatorKind,
) -> Result<Vec<crate::estimators::CurvePoint>, crate::estimators::EstimatorError> {
    ens.curve.curve(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdp::WaitingTime;

    fn bath() -> BathCorrelation {
        BathCorrelation::resonant(1.0, 0.2)
    }

    #[test]
    fn kernel_values() {
        let b = bath();
        assert!((b.f0() - 0.1).abs() < 1e-15);
        assert!((b.vacuum_rate() - 0.1f64.sqrt()).abs() < 1e-15);
        assert!((b.vacuum_rate() - 0.316_227_766).abs() < 1e-8);
        // |f| decreases monotonically
        assert!(b.abs_f(0.0) > b.abs_f(0.5));
        assert!(b.abs_f(0.5) > b.abs_f(2.0));
        // q = exp(-sqrt(2.5))
        assert!((b.no_jump_probability() - (-2.5f64.sqrt()).exp()).abs() < 1e-15);
    }

    #[test]
    fn detuned_kernel_magnitude_matches_resonant() {
        let res = bath();
        let det = BathCorrelation::detuned(1.0, 0.2, 1.0);
        for t in [0.0, 0.3, 1.7, 4.0] {
            assert!((res.abs_f(t) - det.abs_f(t)).abs() < 1e-15);
        }
        // phase rotates with the detuning
        let tau = std::f64::consts::PI / det.delta;
        let phase = det.f(tau) / det.f(tau).norm();
        assert!((phase - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn vacuum_rate_from_excited_state() {
        let m = JcModel::new(bath());
        let psi = StateVector::basis(2, EXCITED);
        let env = ReservoirState::vacuum();
        assert!((m.rate(CHANNEL_EMIT, &psi, &env, 0.0) - 0.1f64.sqrt()).abs() < 1e-14);
        assert_eq!(m.rate(CHANNEL_ABSORB, &psi, &env, 0.0), 0.0);
    }

    #[test]
    fn one_particle_rate_is_continuous_at_creation() {
        let m = JcModel::new(bath());
        let mut psi = StateVector::basis(2, EXCITED);
        let mut env = ReservoirState::vacuum();
        m.apply_jump(CHANNEL_EMIT, &mut psi, &mut env, 1.25).unwrap();
        let just_after = m.rate(CHANNEL_ABSORB, &psi, &env, 1.25);
        assert!((just_after - bath().vacuum_rate()).abs() < 1e-14);
    }

    #[test]
    fn jump_cycle_norm_and_phase() {
        let b = BathCorrelation::detuned(1.0, 0.2, 1.0);
        let m = JcModel::new(b);
        let mut psi = StateVector::basis(2, EXCITED);
        let mut env = ReservoirState::vacuum();
        m.apply_jump(CHANNEL_EMIT, &mut psi, &mut env, 0.5).unwrap();
        assert_eq!(env.sector(), Sector::OneParticle);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!((psi.amps()[GROUND] - C64::new(0.0, -1.0)).norm() < 1e-12);
        // emit -> absorb after tau: phase f(tau)/|f(tau)| = e^{i delta tau}
        let tau = 0.8;
        m.apply_jump(CHANNEL_ABSORB, &mut psi, &mut env, 0.5 + tau).unwrap();
        assert_eq!(env.sector(), Sector::Vacuum);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let want = C64::from_polar(1.0, b.delta * tau);
        assert!((env.prefactor() - want).norm() < 1e-12);
        // psi picked up (-i)^2 = -1 on the excited component
        assert!((psi.amps()[EXCITED] - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn waiting_time_closed_forms() {
        let m = JcModel::new(bath());
        let psi_e = StateVector::basis(2, EXCITED);
        let vac = ReservoirState::vacuum();
        // vacuum: tau = target / sqrt(f0)
        match m.invert_waiting_time(&psi_e, &vac, 3.0, 1.0).unwrap().unwrap() {
            WaitingTime::Finite(tau) => assert!((tau - 1.0 / 0.1f64.sqrt()).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        // one-particle: below q jumps, above q terminates
        let mut psi = psi_e.clone();
        let mut env = vac;
        m.apply_jump(CHANNEL_EMIT, &mut psi, &mut env, 0.0).unwrap();
        let q = bath().no_jump_probability();
        let eta_small = 0.9 * q;
        let target = -eta_small.ln();
        assert_eq!(
            m.invert_waiting_time(&psi, &env, 0.0, target).unwrap().unwrap(),
            WaitingTime::Infinite
        );
        let eta = 1.1 * q;
        let target = -eta.ln();
        let expected = -(1.0 / 0.2) * (1.0 + (2.0 * 0.2f64).sqrt() * eta.ln()).ln();
        match m.invert_waiting_time(&psi, &env, 0.0, target).unwrap().unwrap() {
            WaitingTime::Finite(tau) => {
                assert!((tau - expected).abs() < 1e-10, "{tau} vs {expected}")
            }
            other => panic!("{other:?}"),
        }
        // eta exactly q sits on the boundary and terminates
        let target_q = -q.ln();
        assert_eq!(
            m.invert_waiting_time(&psi, &env, 0.0, target_q).unwrap().unwrap(),
            WaitingTime::Infinite
        );
    }

    #[test]
    fn closed_form_drift_matches_quadrature() {
        let m = JcModel::new(bath());
        let mut psi = StateVector::basis(2, EXCITED);
        let mut env = ReservoirState::vacuum();
        m.apply_jump(CHANNEL_EMIT, &mut psi, &mut env, 0.7).unwrap();
        for (t, dt) in [(0.7, 0.4), (1.0, 2.0), (2.5, 5.0)] {
            let closed = m.integrated_total_rate(&psi, &env, t, dt);
            let quad = crate::pdp::adaptive_simpson(
                &|s| m.total_rate(&psi, &env, s),
                t,
                t + dt,
                1e-12,
            );
            assert!((closed - quad).abs() < 1e-9 * closed.max(1e-9), "{closed} vs {quad}");
        }
    }

    #[test]
    fn overlap_sectors() {
        let b = bath();
        let vac = ReservoirState::vacuum();
        assert!((overlap(&b, &vac, &vac) - C64::new(1.0, 0.0)).norm() < 1e-15);
        let mut psi = StateVector::basis(2, EXCITED);
        let mut one = vac;
        JcModel::new(b).apply_jump(CHANNEL_EMIT, &mut psi, &mut one, 2.0).unwrap();
        assert_eq!(overlap(&b, &vac, &one), C64::new(0.0, 0.0));
        assert!((overlap(&b, &one, &one) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ground_vacuum_branch_never_jumps() {
        let m = JcModel::new(bath());
        let psi = StateVector::basis(2, GROUND);
        let env = ReservoirState::vacuum();
        assert_eq!(
            m.invert_waiting_time(&psi, &env, 0.0, 0.5).unwrap().unwrap(),
            WaitingTime::Infinite
        );
    }

    #[test]
    fn population_starts_at_one() {
        let m = JcModel::new(bath());
        let grid = vec![0.0, 0.5, 1.0];
        let opts = JcRunOptions { n_traj: 200, seed: 9, ..Default::default() };
        let ens = run_ensemble(&m, JcObservable::ExcitedPopulation, &grid, &opts).unwrap();
        let curve = ens.curve.curve(EstimatorKind::Product).unwrap();
        assert!((curve[0].value.re - 1.0).abs() < 1e-12);
        assert!(curve[0].stderr_re < 1e-12);
        assert_eq!(curve[0].n, 200);
    }
}
