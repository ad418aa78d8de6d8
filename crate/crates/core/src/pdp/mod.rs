//! Generic driver for piecewise deterministic jump processes on product-state
//! pairs: deterministic norm drift of the environment factor interrupted by
//! norm-conserving jumps at state-dependent rates.

mod waiting;

pub use waiting::{
    adaptive_simpson, invert_integrated, sample_waiting_time, select_channel, PdpError,
    RateFunction, WaitingTime,
};

use rand_chacha::ChaCha8Rng;

use crate::rng::{uniform_open01, TrajectoryRngs};
use crate::state::{ProductPair, StateVector};

/// Environment-state representation. Jump maps keep the representation
/// norm-conserving; all norm growth (drift, constant-rate scalings) passes
/// through `scale_log`.
pub trait EnvState: Clone {
    /// ln of the state norm.
    fn log_norm(&self) -> f64;
    /// Multiply the state by exp(dlog).
    fn scale_log(&mut self, dlog: f64);
}

/// A concrete interaction: channels alpha with system maps A_alpha and
/// environment maps B_alpha, exposed through their norm ratios and the
/// norm-conserving jump action.
pub trait PdpModel {
    type Env: EnvState;

    fn channel_count(&self) -> usize;

    /// (|A_a psi| / |psi|, |B_a chi| / |chi|) at time t. Their product is the
    /// jump rate of the norm-conserving scheme.
    fn rate_factors(&self, alpha: usize, psi: &StateVector, env: &Self::Env, t: f64)
        -> (f64, f64);

    fn rate(&self, alpha: usize, psi: &StateVector, env: &Self::Env, t: f64) -> f64 {
        let (fs, fe) = self.rate_factors(alpha, psi, env, t);
        fs * fe
    }

    fn total_rate(&self, psi: &StateVector, env: &Self::Env, t: f64) -> f64 {
        (0..self.channel_count()).map(|a| self.rate(a, psi, env, t)).sum()
    }

    /// int_{t}^{t+dt} Gamma(s) ds with the states held fixed at their current
    /// (post-jump) values. Default: adaptive quadrature on `total_rate`.
    fn integrated_total_rate(&self, psi: &StateVector, env: &Self::Env, t: f64, dt: f64) -> f64 {
        adaptive_simpson(&|s| self.total_rate(psi, env, s), t, t + dt, waiting::SIMPSON_REL_TOL)
    }

    /// Closed-form solution of int_{t}^{t+tau} Gamma = target where available.
    /// Implementations must return `Infinite` when the full-future integral
    /// stays below `target`. `None` falls back to numerical inversion.
    fn invert_waiting_time(
        &self,
        _psi: &StateVector,
        _env: &Self::Env,
        _t: f64,
        _target: f64,
    ) -> Option<Result<WaitingTime, PdpError>> {
        None
    }

    /// Apply the norm-conserving jump maps of channel `alpha` at time t:
    /// psi -> -i (|psi|/|A psi|) A psi, chi -> (|chi|/|B chi|) B chi.
    fn apply_jump(
        &self,
        alpha: usize,
        psi: &mut StateVector,
        env: &mut Self::Env,
        t: f64,
    ) -> Result<(), PdpError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: usize,
}

/// State of one branch at a requested sample time. `env` includes all drift
/// accumulated up to `t`; `drift_log` duplicates int_0^t Gamma ds for
/// consistency checks.
#[derive(Debug, Clone)]
pub struct BranchSample<'a, E> {
    pub t: f64,
    pub psi: &'a StateVector,
    pub env: E,
    pub drift_log: f64,
    pub jump_count: usize,
    pub dead: bool,
}

/// Full record of one branch over [t0, t_final].
#[derive(Debug, Clone)]
pub struct BranchRecord<E> {
    pub jumps: Vec<JumpEvent>,
    /// int over the whole horizon of the total rate along the realization.
    pub drift_log: f64,
    pub psi: StateVector,
    pub env: E,
    /// Took the tau = infinity branch: no jumps ever occur after the last one.
    pub terminated: bool,
    /// Jump scaling annihilated the state (possible only in the
    /// constant-rate scheme).
    pub dead: bool,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord<E> {
    pub branches: [BranchRecord<E>; 2],
    pub t_final: f64,
}

#[derive(Clone, Copy)]
enum Scheme<'a> {
    /// Rates from the model, jumps norm-conserving.
    Natural,
    /// Fixed per-channel rates; jumps rescaled by f/sqrt(rate).
    ConstantRate(&'a [f64]),
}

/// Evolve a single branch, invoking `observer` at every grid time (grid must
/// be sorted, within [t0, t_final]). A grid point coinciding with a jump time
/// samples the state just before the jump.
pub fn evolve_branch<M: PdpModel>(
    model: &M,
    psi0: StateVector,
    env0: M::Env,
    t0: f64,
    t_final: f64,
    grid: &[f64],
    rng: &mut ChaCha8Rng,
    observer: impl FnMut(usize, &BranchSample<'_, M::Env>),
) -> Result<BranchRecord<M::Env>, PdpError> {
    evolve_branch_impl(model, Scheme::Natural, psi0, env0, t0, t_final, grid, rng, observer)
}

/// Constant-rate variant: waiting times are exponential with the supplied
/// rates and jump maps carry the compensating 1/sqrt(rate) factors, which are
/// not norm-conserving.
pub fn evolve_branch_constant_rate<M: PdpModel>(
    model: &M,
    rates: &[f64],
    psi0: StateVector,
    env0: M::Env,
    t0: f64,
    t_final: f64,
    grid: &[f64],
    rng: &mut ChaCha8Rng,
    observer: impl FnMut(usize, &BranchSample<'_, M::Env>),
) -> Result<BranchRecord<M::Env>, PdpError> {
    if rates.len() != model.channel_count() {
        return Err(PdpError::Model(format!(
            "expected {} constant rates, got {}",
            model.channel_count(),
            rates.len()
        )));
    }
    for &r in rates {
        if !(r > 0.0) {
            return Err(PdpError::NonPositiveConstantRate(r));
        }
    }
    evolve_branch_impl(
        model,
        Scheme::ConstantRate(rates),
        psi0,
        env0,
        t0,
        t_final,
        grid,
        rng,
        observer,
    )
}

#[allow(clippy::too_many_arguments)]
fn evolve_branch_impl<M: PdpModel>(
    model: &M,
    scheme: Scheme<'_>,
    mut psi: StateVector,
    mut env: M::Env,
    t0: f64,
    t_final: f64,
    grid: &[f64],
    rng: &mut ChaCha8Rng,
    mut observer: impl FnMut(usize, &BranchSample<'_, M::Env>),
) -> Result<BranchRecord<M::Env>, PdpError> {
    debug_assert!(grid.windows(2).all(|w| w[0] <= w[1]), "grid must be sorted");
    let mut t = t0;
    let mut drift = 0.0f64;
    let mut jumps = Vec::new();
    let mut gi = 0usize;
    let mut dead = false;
    let mut terminated = false;

    let integrated = |psi: &StateVector, env: &M::Env, t: f64, dt: f64| -> Result<f64, PdpError> {
        if dt <= 0.0 {
            return Ok(0.0);
        }
        let v = match scheme {
            Scheme::Natural => model.integrated_total_rate(psi, env, t, dt),
            Scheme::ConstantRate(rates) => rates.iter().sum::<f64>() * dt,
        };
        if !v.is_finite() || v < 0.0 {
            return Err(PdpError::NonFiniteRate(t));
        }
        Ok(v)
    };

    loop {
        if dead {
            // Zero state: amplitudes vanish identically, nothing evolves.
            while gi < grid.len() {
                let s = BranchSample {
                    t: grid[gi],
                    psi: &psi,
                    env: env.clone(),
                    drift_log: drift,
                    jump_count: jumps.len(),
                    dead: true,
                };
                observer(gi, &s);
                gi += 1;
            }
            break;
        }

        let eta = uniform_open01(rng);
        let target = -eta.ln();
        let wt = match scheme {
            Scheme::Natural => match model.invert_waiting_time(&psi, &env, t, target) {
                Some(res) => res?,
                None => {
                    let span = t_final - t;
                    if span <= 0.0 {
                        WaitingTime::NoJumpWithinHorizon
                    } else {
                        invert_integrated(
                            &|dt| model.integrated_total_rate(&psi, &env, t, dt),
                            target,
                            span,
                        )?
                    }
                }
            },
            Scheme::ConstantRate(rates) => {
                let total: f64 = rates.iter().sum();
                WaitingTime::Finite(target / total)
            }
        };

        let jump_at = match wt {
            WaitingTime::Finite(tau) => {
                let tj = t + tau;
                if tj <= t_final {
                    Some(tj)
                } else {
                    None
                }
            }
            WaitingTime::NoJumpWithinHorizon => None,
            WaitingTime::Infinite => {
                terminated = true;
                None
            }
        };
        let window_end = jump_at.unwrap_or(t_final);

        // Samples inside the drift window, state frozen, drift accrued.
        while gi < grid.len() && grid[gi] <= window_end {
            let g = grid[gi];
            let d = integrated(&psi, &env, t, g - t)?;
            let mut env_g = env.clone();
            env_g.scale_log(d);
            let s = BranchSample {
                t: g,
                psi: &psi,
                env: env_g,
                drift_log: drift + d,
                jump_count: jumps.len(),
                dead: false,
            };
            observer(gi, &s);
            gi += 1;
        }

        match jump_at {
            None => {
                let d = integrated(&psi, &env, t, t_final - t)?;
                drift += d;
                env.scale_log(d);
                t = t_final;
                break;
            }
            Some(tj) => {
                // By construction of the inversion the drift exponent over
                // (t, tj] equals the drawn target.
                drift += target;
                env.scale_log(target);
                t = tj;
                let eta2 = uniform_open01(rng);
                match scheme {
                    Scheme::Natural => {
                        let rates: Vec<f64> = (0..model.channel_count())
                            .map(|a| model.rate(a, &psi, &env, t))
                            .collect();
                        for (channel, &r) in rates.iter().enumerate() {
                            if r < 0.0 {
                                return Err(PdpError::NegativeRate { channel, t, value: r });
                            }
                            if !r.is_finite() {
                                return Err(PdpError::NonFiniteRate(t));
                            }
                        }
                        let alpha = select_channel(&rates, eta2)?;
                        model.apply_jump(alpha, &mut psi, &mut env, t)?;
                        jumps.push(JumpEvent { t, channel: alpha });
                    }
                    Scheme::ConstantRate(rates) => {
                        let alpha = select_channel(rates, eta2)?;
                        let (fs, fe) = model.rate_factors(alpha, &psi, &env, t);
                        jumps.push(JumpEvent { t, channel: alpha });
                        if fs == 0.0 || fe == 0.0 {
                            // A or B annihilates the state: the trajectory
                            // continues as the zero vector.
                            psi.scale(crate::linalg::C64::new(0.0, 0.0));
                            dead = true;
                            continue;
                        }
                        model.apply_jump(alpha, &mut psi, &mut env, t)?;
                        let scale = rates[alpha].sqrt();
                        psi.scale(crate::linalg::C64::new(fs / scale, 0.0));
                        env.scale_log((fe / scale).ln());
                    }
                }
            }
        }
    }

    Ok(BranchRecord { jumps, drift_log: drift, psi, env, terminated, dead })
}

/// Evolve both branches of a pair independently on disjoint random streams,
/// materializing per-branch grid snapshots into the record.
pub fn evolve_pair<M: PdpModel>(
    model: &M,
    pair: ProductPair<M::Env>,
    t_final: f64,
    grid: &[f64],
    rngs: &TrajectoryRngs,
) -> Result<(TrajectoryRecord<M::Env>, Vec<[OwnedSample<M::Env>; 2]>), PdpError> {
    let t0 = pair.t;
    let [psi1, psi2] = pair.psi;
    let [env1, env2] = pair.env;
    let mut samples1: Vec<OwnedSample<M::Env>> = Vec::with_capacity(grid.len());
    let mut rng1 = rngs.branch[0].rng();
    let b1 = evolve_branch(model, psi1, env1, t0, t_final, grid, &mut rng1, |_, s| {
        samples1.push(OwnedSample::from(s));
    })?;
    let mut samples2: Vec<OwnedSample<M::Env>> = Vec::with_capacity(grid.len());
    let mut rng2 = rngs.branch[1].rng();
    let b2 = evolve_branch(model, psi2, env2, t0, t_final, grid, &mut rng2, |_, s| {
        samples2.push(OwnedSample::from(s));
    })?;
    let zipped = samples1.into_iter().zip(samples2).map(|(a, b)| [a, b]).collect();
    Ok((TrajectoryRecord { branches: [b1, b2], t_final }, zipped))
}

/// Owning variant of [`BranchSample`] for record-returning APIs.
#[derive(Debug, Clone)]
pub struct OwnedSample<E> {
    pub t: f64,
    pub psi: StateVector,
    pub env: E,
    pub drift_log: f64,
    pub jump_count: usize,
    pub dead: bool,
}

impl<E: Clone> From<&BranchSample<'_, E>> for OwnedSample<E> {
    fn from(s: &BranchSample<'_, E>) -> Self {
        Self {
            t: s.t,
            psi: s.psi.clone(),
            env: s.env.clone(),
            drift_log: s.drift_log,
            jump_count: s.jump_count,
            dead: s.dead,
        }
    }
}
