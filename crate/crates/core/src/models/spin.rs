//! Central spin coupled uniformly to N bath spins. After the frame
//! transformation that absorbs the conserved total 3-component, each branch
//! is a constant-rate jump process and the coherence of the central spin is
//! a closed-form functional of the jump record, so trajectories reduce to
//! (j, m) draws plus exponential waiting times.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::estimators::{BranchCoupling, CurveAccumulator, KahanSum};
use crate::linalg::C64;
use crate::rng::{uniform_open01, TrajectoryRngs};

#[derive(Debug, Error, PartialEq)]
pub enum SpinError {
    #[error("m = {two_m}/2 invalid for N = {n}")]
    InvalidM { n: usize, two_m: i64 },
    #[error("bath must contain at least one spin")]
    EmptyBath,
    #[error("empty time grid")]
    EmptyGrid,
    #[error("need at least one trajectory")]
    ZeroTrajectories,
    #[error("time grid must be sorted and nonnegative")]
    UnsortedGrid,
}

/// Model parameters: N bath spins, per-spin coupling A/sqrt(N), central
/// splitting omega0.
#[derive(Debug, Clone, Copy)]
pub struct SpinBathParams {
    pub n_spins: usize,
    /// Collective coupling A (angular frequency).
    pub coupling: f64,
    pub omega0: f64,
}

/// ln C(n, k) through the log-gamma function; exact enough for n up to 1e6.
fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// ln of the multiplicity a_j^N of total angular momentum j (j given as 2j).
/// a_j^N = C(N, N/2+j) - C(N, N/2+j+1) = C(N, N/2+j) (2j+1)/(N/2+j+1),
/// evaluated in log space; the ratio form avoids cancellation.
pub fn ln_multiplicity(n: usize, two_j: u64) -> f64 {
    debug_assert_eq!(two_j as usize % 2, n % 2, "j parity must match N");
    let k2 = n as u64 + two_j; // 2(N/2 + j)
    let k = (k2 / 2) as usize;
    ln_binomial(n, k) + ((two_j + 1) as f64 / (k as f64 + 1.0)).ln()
}

/// P(j, m) = 2^{-N} a_j^N, independent of m.
pub fn prob_jm(n: usize, two_j: u64) -> f64 {
    (ln_multiplicity(n, two_j) - n as f64 * std::f64::consts::LN_2).exp()
}

/// Marginal probability of the magnetic quantum number,
/// p_m = 2^{-N} C(N, N/2 + m).
pub fn marginal_pm(n: usize, two_m: i64) -> Result<f64, SpinError> {
    let k2 = n as i64 + two_m;
    if k2 < 0 || k2 > 2 * n as i64 || k2 % 2 != 0 {
        return Err(SpinError::InvalidM { n, two_m });
    }
    let k = (k2 / 2) as usize;
    Ok((ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2).exp())
}

/// Inversion sampler for (j, m) in the unpolarized bath ensemble.
#[derive(Debug, Clone)]
pub struct JmSampler {
    n: usize,
    two_js: Vec<u64>,
    cdf: Vec<f64>,
}

impl JmSampler {
    pub fn new(n: usize) -> Result<Self, SpinError> {
        if n == 0 {
            return Err(SpinError::EmptyBath);
        }
        let start = (n % 2) as u64;
        let two_js: Vec<u64> = (0..).map(|i| start + 2 * i).take_while(|&tj| tj <= n as u64).collect();
        let mut acc = KahanSum::default();
        let mut cdf = Vec::with_capacity(two_js.len());
        for &tj in &two_js {
            // marginal over m: (2j+1) P(j,m)
            acc.add((tj + 1) as f64 * prob_jm(n, tj));
            cdf.push(acc.value());
        }
        let total = acc.value();
        debug_assert!((total - 1.0).abs() < 1e-9, "j-marginal sums to {total}");
        for v in &mut cdf {
            *v /= total;
        }
        Ok(Self { n, two_js, cdf })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Draw (2j, 2m).
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> (u64, i64) {
        let u = uniform_open01(rng);
        let idx = self.cdf.partition_point(|&c| c < u).min(self.two_js.len() - 1);
        let two_j = self.two_js[idx];
        // m uniform on {-j, ..., j}
        let steps = rng.gen_range(0..=two_j);
        let two_m = -(two_j as i64) + 2 * steps as i64;
        (two_j, two_m)
    }

    /// Exact cell probabilities P(j, m) for every (2j, 2m), for tests.
    pub fn table(&self) -> Vec<((u64, i64), f64)> {
        let mut out = Vec::new();
        for &tj in &self.two_js {
            let p = prob_jm(self.n, tj);
            let mut tm = -(tj as i64);
            while tm <= tj as i64 {
                out.push(((tj, tm), p));
                tm += 2;
            }
        }
        out
    }
}

/// Jump rates of the two branches,
/// Gamma_pm = 2A sqrt((j(j+1) - m(m +- 1)) / N).
pub fn spin_rates(params: &SpinBathParams, two_j: u64, two_m: i64) -> (f64, f64) {
    let n = params.n_spins as f64;
    let jj = (two_j * (two_j + 2)) as f64; // 4 j(j+1)
    let rate = |mm: f64| params.coupling * ((jj - mm).max(0.0) / n).sqrt();
    let mm_plus = (two_m * (two_m + 2)) as f64; // 4 m(m+1)
    let mm_minus = (two_m * (two_m - 2)) as f64;
    (rate(mm_plus), rate(mm_minus))
}

/// Transformed-frame precession frequencies omega_pm = omega0 +
/// (2A/sqrt(N)) (±1 + 2m).
pub fn spin_frequencies(params: &SpinBathParams, two_m: i64) -> (f64, f64) {
    let shift = 2.0 * params.coupling / (params.n_spins as f64).sqrt();
    (params.omega0 + shift * (two_m + 1) as f64, params.omega0 + shift * (two_m - 1) as f64)
}

/// Second-order time-convolutionless prediction for the coherence,
/// rho_pm(t) = exp(-G(t)) with
/// G = (4iA^2 t/w0)(1 - sin(w0 t)/(w0 t)) + 2A^2 t^2 (1 + 2(1-cos(w0 t))/(w0 t)^2).
pub fn tcl2_coherence(params: &SpinBathParams, t: f64) -> C64 {
    let a2 = params.coupling * params.coupling;
    let x = params.omega0 * t;
    let (sinc, cosc) = if x.abs() < 1e-4 {
        // series for sin(x)/x and (1 - cos x)/x^2
        let x2 = x * x;
        (1.0 - x2 / 6.0 + x2 * x2 / 120.0, 0.5 - x2 / 24.0 + x2 * x2 / 720.0)
    } else {
        (x.sin() / x, (1.0 - x.cos()) / (x * x))
    };
    let re = 2.0 * a2 * t * t * (1.0 + 2.0 * cosc);
    let im = 4.0 * a2 * t / params.omega0 * (1.0 - sinc);
    (-C64::new(re, im)).exp()
}

/// Closed-form standard-error growth estimate exp(4 A t)/sqrt(n_traj).
pub fn error_growth_estimate(coupling: f64, t: f64, n_traj: u64) -> f64 {
    (4.0 * coupling * t).exp() / (n_traj as f64).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct SpinRunOptions {
    pub n_traj: u64,
    pub seed: u64,
    pub batch: u64,
    /// Disable the flip-flop channels (rates forced to zero, frame phase
    /// kept): the coherence reduces to cos(2At/sqrt(N))^N.
    pub flip_flop: bool,
}

impl Default for SpinRunOptions {
    fn default() -> Self {
        Self { n_traj: 10_000, seed: 1, batch: 2048, flip_flop: true }
    }
}

#[derive(Debug, Clone)]
pub struct SpinEnsemble {
    pub curve: CurveAccumulator,
    pub n_traj: u64,
}

/// Walk one branch: constant-rate Poisson jumps; at each requested time the
/// branch weight is zero for odd jump counts and
/// (-1)^{k/2} e^{Gamma t} e^{i omega T_even} otherwise.
struct BranchWalk {
    rate: f64,
    omega: f64,
    k: u64,
    even_sum: f64,
    last_jump: f64,
    next_jump: f64,
}

impl BranchWalk {
    fn new<R: rand::Rng>(rate: f64, omega: f64, rng: &mut R) -> Self {
        let next_jump = if rate > 0.0 { -uniform_open01(rng).ln() / rate } else { f64::INFINITY };
        Self { rate, omega, k: 0, even_sum: 0.0, last_jump: 0.0, next_jump }
    }

    fn advance<R: rand::Rng>(&mut self, t: f64, rng: &mut R) {
        while self.next_jump <= t {
            self.k += 1;
            if self.k % 2 == 0 {
                self.even_sum += self.next_jump - self.last_jump;
            }
            self.last_jump = self.next_jump;
            self.next_jump += -uniform_open01(rng).ln() / self.rate;
        }
    }

    /// (unit phase including the sign, drift exponent Gamma*t), or None for
    /// odd jump parity.
    fn weight(&self, t: f64) -> Option<(C64, f64)> {
        if self.k % 2 == 1 {
            return None;
        }
        let sign = if (self.k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let phase = C64::from_polar(sign, self.omega * self.even_sum);
        Some((phase, self.rate * t))
    }
}

/// Monte Carlo estimate of the central-spin coherence rho_{+-}(t) on `grid`
/// from the unpolarized bath. Branches share the (j, m) draw, so only the
/// paired estimator applies.
pub fn run_ensemble(
    params: &SpinBathParams,
    grid: &[f64],
    opts: &SpinRunOptions,
) -> Result<SpinEnsemble, SpinError> {
    if grid.is_empty() {
        return Err(SpinError::EmptyGrid);
    }
    if grid.windows(2).any(|w| w[0] > w[1]) || grid[0] < 0.0 {
        return Err(SpinError::UnsortedGrid);
    }
    if opts.n_traj == 0 {
        return Err(SpinError::ZeroTrajectories);
    }
    let sampler = JmSampler::new(params.n_spins)?;
    let phase_rate_per_two_m = -2.0 * params.coupling / (params.n_spins as f64).sqrt();

    crate::ensemble::parallel_fold(
        opts.n_traj,
        opts.batch,
        || SpinEnsemble {
            curve: CurveAccumulator::new(grid.to_vec(), BranchCoupling::Correlated),
            n_traj: 0,
        },
        |acc: &mut SpinEnsemble, traj: u64| -> Result<(), SpinError> {
            let rngs = TrajectoryRngs::new(opts.seed, traj);
            let mut init_rng = rngs.init.rng();
            let (two_j, two_m) = sampler.sample(&mut init_rng);
            let (gp, gm) = if opts.flip_flop {
                spin_rates(params, two_j, two_m)
            } else {
                (0.0, 0.0)
            };
            let (wp, wm) = spin_frequencies(params, two_m);
            let mut rng_plus = rngs.branch[0].rng();
            let mut rng_minus = rngs.branch[1].rng();
            let mut plus = BranchWalk::new(gp, wp, &mut rng_plus);
            let mut minus = BranchWalk::new(gm, wm, &mut rng_minus);
            let m_phase_rate = phase_rate_per_two_m * two_m as f64;

            for (gi, &t) in grid.iter().enumerate() {
                plus.advance(t, &mut rng_plus);
                minus.advance(t, &mut rng_minus);
                let (a, b) = match (plus.weight(t), minus.weight(t)) {
                    (Some((ph_p, dp)), Some((ph_m, dm))) => {
                        let magnitude = (dp + dm).exp();
                        let frame = C64::from_polar(1.0, m_phase_rate * t);
                        // a carries the magnitude, the frame phase, and the
                        // plus-branch phase; conj(b) restores the
                        // minus-branch phase.
                        (ph_p * frame * magnitude, ph_m.conj())
                    }
                    _ => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
                };
                acc.curve.push(gi, a, b);
            }
            acc.n_traj += 1;
            Ok(())
        },
        |acc, other| {
            acc.curve.merge(&other.curve);
            acc.n_traj += other.n_traj;
        },
    )
}

/// Coherence with the flip-flop channels removed: [cos(2At/sqrt N)]^N.
pub fn dephasing_closed_form(params: &SpinBathParams, t: f64) -> f64 {
    (2.0 * params.coupling * t / (params.n_spins as f64).sqrt()).cos().powi(params.n_spins as i32)
}

/// Large-N limit of the dephasing coherence: exp(-2 A^2 t^2).
pub fn dephasing_gaussian(coupling: f64, t: f64) -> f64 {
    (-2.0 * coupling * coupling * t * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorKind;
    use rand::SeedableRng;

    #[test]
    fn multiplicities_for_four_spins() {
        // a_0^4 = 2, a_1^4 = 3, a_2^4 = 1
        let a: Vec<f64> =
            [0u64, 2, 4].iter().map(|&tj| ln_multiplicity(4, tj).exp()).collect();
        assert!((a[0] - 2.0).abs() < 1e-10);
        assert!((a[1] - 3.0).abs() < 1e-10);
        assert!((a[2] - 1.0).abs() < 1e-10);
        // completeness: sum (2j+1) a_j = 2^4
        let total: f64 = [0u64, 2, 4]
            .iter()
            .map(|&tj| (tj + 1) as f64 * ln_multiplicity(4, tj).exp())
            .sum();
        assert!((total - 16.0).abs() < 1e-9);
    }

    #[test]
    fn marginal_binomial_values() {
        assert!((marginal_pm(2, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!((marginal_pm(4, 4).unwrap() - 1.0 / 16.0).abs() < 1e-12);
        assert!((marginal_pm(4, -4).unwrap() - 1.0 / 16.0).abs() < 1e-12);
        assert!(marginal_pm(4, 6).is_err());
        assert!(marginal_pm(4, 1).is_err());
    }

    #[test]
    fn multiplicity_telescopes_to_binomial() {
        // sum_{j >= |m|} a_j^N = C(N, N/2 + m) for all N <= 12
        for n in 1..=12usize {
            let start = (n % 2) as u64;
            let mut two_m = -(n as i64);
            while two_m <= n as i64 {
                if (n as i64 + two_m) % 2 == 0 {
                    let lhs: f64 = (0..)
                        .map(|i| start + 2 * i)
                        .take_while(|&tj| tj <= n as u64)
                        .filter(|&tj| tj as i64 >= two_m.abs())
                        .map(|tj| ln_multiplicity(n, tj).exp())
                        .sum();
                    let rhs = marginal_pm(n, two_m).unwrap() * (n as f64 * std::f64::consts::LN_2).exp();
                    assert!(
                        (lhs - rhs).abs() < 1e-8 * rhs.max(1.0),
                        "N={n} 2m={two_m}: {lhs} vs {rhs}"
                    );
                }
                two_m += 2;
            }
        }
    }

    #[test]
    fn sampler_is_complete_for_large_baths() {
        for n in [2usize, 7, 100, 1000, 2000] {
            let s = JmSampler::new(n).unwrap();
            let total: f64 =
                s.two_js.iter().map(|&tj| (tj + 1) as f64 * prob_jm(n, tj)).sum();
            assert!((total - 1.0).abs() < 1e-10, "N={n}: {total}");
        }
    }

    #[test]
    fn rates_vanish_on_stretched_states() {
        let p = SpinBathParams { n_spins: 4, coupling: 1.0, omega0: 1.0 };
        // j = m = 1 (two_j = two_m = 2): raising rate zero
        let (gp, _) = spin_rates(&p, 2, 2);
        assert_eq!(gp, 0.0);
        // j=1, m=0, N=4, A=1 -> both rates sqrt(2)
        let (gp, gm) = spin_rates(&p, 2, 0);
        assert!((gp - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((gm - 2.0f64.sqrt()).abs() < 1e-12);
        // j = 0: no dynamics at all
        let (gp, gm) = spin_rates(&p, 0, 0);
        assert_eq!((gp, gm), (0.0, 0.0));
    }

    #[test]
    fn tcl2_limits() {
        let p = SpinBathParams { n_spins: 100, coupling: 0.3, omega0: 1.0 };
        assert!((tcl2_coherence(&p, 0.0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        // at w0 t = 2pi: G = 4iA^2 t/w0 + 2A^2 t^2
        let t = std::f64::consts::TAU;
        let a2 = 0.09;
        let want = (-C64::new(2.0 * a2 * t * t, 4.0 * a2 * t)).exp();
        assert!((tcl2_coherence(&p, t) - want).norm() < 1e-10);
        // |exp(-G)| decreasing in t
        let mut prev = 1.0;
        for i in 1..50 {
            let v = tcl2_coherence(&p, i as f64 * 0.1).norm();
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn zero_coupling_is_static() {
        let p = SpinBathParams { n_spins: 16, coupling: 0.0, omega0: 1.0 };
        let grid = vec![0.0, 1.0, 5.0];
        let opts = SpinRunOptions { n_traj: 100, seed: 3, ..Default::default() };
        let ens = run_ensemble(&p, &grid, &opts).unwrap();
        for pt in ens.curve.curve(EstimatorKind::Paired).unwrap() {
            assert!((pt.value - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(pt.stderr_re < 1e-12);
        }
    }

    #[test]
    fn branch_walk_even_waiting_sums() {
        // fixed jump times: walk must sum tau_2, tau_4, ...
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut w = BranchWalk::new(1.0, 0.7, &mut rng);
        // override the sampled schedule with a deterministic one
        w.next_jump = 0.5;
        w.advance(0.6, &mut rng);
        assert_eq!(w.k, 1);
        assert!(w.weight(0.6).is_none());
        let second = w.next_jump;
        w.advance(second, &mut rng);
        assert_eq!(w.k, 2);
        let (phase, drift) = w.weight(second).unwrap();
        // even_sum is tau_2 = t_2 - t_1; sign (-1)^1 = -1
        let want = C64::from_polar(-1.0, 0.7 * (second - 0.5));
        assert!((phase - want).norm() < 1e-12);
        assert!((drift - second).abs() < 1e-12);
    }

    #[test]
    fn sampler_empirical_matches_table_small() {
        use rand::Rng as _;
        let s = JmSampler::new(4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut counts = std::collections::HashMap::new();
        let draws = 200_000;
        for _ in 0..draws {
            let jm = s.sample(&mut rng);
            *counts.entry(jm).or_insert(0u64) += 1;
        }
        let _ = rng.gen::<f64>();
        for ((tj, tm), p) in s.table() {
            let observed = *counts.get(&(tj, tm)).unwrap_or(&0) as f64 / draws as f64;
            let sd = (p * (1.0 - p) / draws as f64).sqrt();
            assert!(
                (observed - p).abs() < 5.0 * sd + 1e-9,
                "(2j,2m)=({tj},{tm}): {observed} vs {p}"
            );
        }
    }
}
