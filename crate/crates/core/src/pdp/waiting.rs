//! Waiting-time sampling: inversion of the cumulative jump distribution
//! F(tau) = 1 - exp(-int Gamma ds), with a defective branch when the exponent
//! stays bounded.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PdpError {
    #[error("negative rate {value:.3e} on channel {channel} at t={t}")]
    NegativeRate { channel: usize, t: f64, value: f64 },
    #[error("all channel rates are zero at a jump; the waiting time should have been infinite")]
    AllRatesZero,
    #[error("no channels supplied")]
    NoChannels,
    #[error("rate evaluation produced a non-finite value at t={0}")]
    NonFiniteRate(f64),
    #[error("waiting-time inversion failed: {0}")]
    InversionFailed(String),
    #[error("constant-rate scheme requires strictly positive rates, got {0}")]
    NonPositiveConstantRate(f64),
    #[error("jump on channel {0} annihilates the state")]
    AnnihilatingJump(usize),
    #[error("model error: {0}")]
    Model(String),
}

/// Outcome of one waiting-time draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitingTime {
    /// Next jump after this interval.
    Finite(f64),
    /// The drawn jump falls beyond the inspection horizon; whether more jumps
    /// ever occur is not decided. Reported rather than clamped.
    NoJumpWithinHorizon,
    /// The integrated rate converges below the drawn exponent: no further
    /// jumps, ever.
    Infinite,
}

/// Time-dependent total jump rate of one branch.
pub trait RateFunction {
    /// Gamma(t) >= 0.
    fn rate(&self, t: f64) -> f64;

    /// int_{t0}^{t0+dt} Gamma(s) ds. The default integrates numerically.
    fn integrated(&self, t0: f64, dt: f64) -> f64 {
        adaptive_simpson(&|s| self.rate(s), t0, t0 + dt, SIMPSON_REL_TOL)
    }

    /// int_{t0}^{inf} Gamma(s) ds when known to converge; enables the exact
    /// infinite branch in [`sample_waiting_time`].
    fn total_remaining(&self, _t0: f64) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64> RateFunction for F {
    fn rate(&self, t: f64) -> f64 {
        self(t)
    }
}

pub(crate) const SIMPSON_REL_TOL: f64 = 1e-9;

/// Adaptive Simpson quadrature with relative tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
        }
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    let scale = whole.abs().max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, tol * scale, 40)
}

/// Solve eta = exp(-int_{t0}^{t0+tau} Gamma ds) for tau.
///
/// Uses the closed-form remaining integral for the infinite branch when the
/// rate function provides one; otherwise a jump falling past `horizon` is
/// reported as [`WaitingTime::NoJumpWithinHorizon`]. Numerical inversion
/// bisects on ln(tau).
pub fn sample_waiting_time<R: RateFunction + ?Sized>(
    rate: &R,
    t0: f64,
    eta: f64,
    horizon: f64,
) -> Result<WaitingTime, PdpError> {
    assert!(eta > 0.0 && eta < 1.0, "eta must lie in (0,1)");
    assert!(horizon > t0, "horizon must exceed t0");
    let target = -eta.ln();
    if let Some(q_exp) = rate.total_remaining(t0) {
        if target >= q_exp {
            return Ok(WaitingTime::Infinite);
        }
    }
    invert_integrated(&|dt| rate.integrated(t0, dt), target, horizon - t0)
}

/// Find the smallest tau with cumulative(tau) = target, cumulative
/// nondecreasing with cumulative(0)=0. Bisection on ln(tau).
pub fn invert_integrated(
    cumulative: &dyn Fn(f64) -> f64,
    target: f64,
    span: f64,
) -> Result<WaitingTime, PdpError> {
    let at_span = cumulative(span);
    if !at_span.is_finite() {
        return Err(PdpError::InversionFailed(format!(
            "integrated rate over span {span} is not finite"
        )));
    }
    if at_span < target {
        return Ok(WaitingTime::NoJumpWithinHorizon);
    }
    // Bracket in log space; anything below the lower end is returned as the
    // lower end itself (absolute error ~1e-35 * span).
    let ln_hi = span.ln();
    let ln_lo = ln_hi - 80.0;
    if cumulative(ln_lo.exp()) >= target {
        return Ok(WaitingTime::Finite(ln_lo.exp()));
    }
    let mut lo = ln_lo;
    let mut hi = ln_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = cumulative(mid.exp());
        if !v.is_finite() {
            return Err(PdpError::InversionFailed("non-finite integrated rate".into()));
        }
        if v >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(WaitingTime::Finite(hi.exp()))
}

/// Select a jump channel with probability Gamma_a / sum Gamma, deterministic
/// in `eta2` by cumulative-sum inversion; ties break toward the lower index.
pub fn select_channel(rates: &[f64], eta2: f64) -> Result<usize, PdpError> {
    if rates.is_empty() {
        return Err(PdpError::NoChannels);
    }
    let mut total = 0.0;
    for (channel, &r) in rates.iter().enumerate() {
        if r < 0.0 {
            return Err(PdpError::NegativeRate { channel, t: f64::NAN, value: r });
        }
        if !r.is_finite() {
            return Err(PdpError::NonFiniteRate(f64::NAN));
        }
        total += r;
    }
    if total <= 0.0 {
        return Err(PdpError::AllRatesZero);
    }
    let threshold = eta2 * total;
    let mut acc = 0.0;
    for (channel, &r) in rates.iter().enumerate() {
        acc += r;
        if acc >= threshold {
            return Ok(channel);
        }
    }
    Ok(rates.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct ConstRate(f64);
    impl RateFunction for ConstRate {
        fn rate(&self, _t: f64) -> f64 {
            self.0
        }
        fn integrated(&self, _t0: f64, dt: f64) -> f64 {
            self.0 * dt
        }
    }

    #[test]
    fn constant_rate_closed_form() {
        // Gamma = 2, eta = 1/e -> tau = 0.5
        let wt = sample_waiting_time(&ConstRate(2.0), 0.0, (-1.0f64).exp(), 100.0).unwrap();
        match wt {
            WaitingTime::Finite(tau) => assert!((tau - 0.5).abs() < 1e-10),
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn numeric_inversion_matches_closed_form() {
        // Same constant rate but through the quadrature default.
        let f = |_t: f64| 2.0;
        let wt = sample_waiting_time(&f, 0.0, (-1.0f64).exp(), 100.0).unwrap();
        match wt {
            WaitingTime::Finite(tau) => assert!((tau - 0.5).abs() < 1e-8),
            other => panic!("expected finite, got {other:?}"),
        }
    }

    struct DecayingRate {
        k: f64,
        lambda: f64,
    }
    impl RateFunction for DecayingRate {
        fn rate(&self, t: f64) -> f64 {
            self.k * (-self.lambda * t).exp()
        }
        fn total_remaining(&self, t0: f64) -> Option<f64> {
            Some(self.k / self.lambda * (-self.lambda * t0).exp())
        }
    }

    #[test]
    fn bounded_exponent_takes_infinite_branch() {
        // Total integral from 0 is k/lambda = sqrt(gamma0 / (2 lambda)) for the
        // bosonic-decay law; q = exp(-sqrt(2.5)) for gamma0=1, lambda=0.2.
        let gamma0 = 1.0;
        let lambda = 0.2;
        let f0 = 0.5 * gamma0 * lambda;
        let r = DecayingRate { k: f0 / f0.sqrt(), lambda };
        let q = (-(gamma0 / (2.0 * lambda)).sqrt()).exp();
        assert!((q - 0.205_7).abs() < 5e-4);
        let below = sample_waiting_time(&r, 0.0, 0.9 * q, 1e6).unwrap();
        assert_eq!(below, WaitingTime::Infinite);
        // Just above q the jump is finite and matches the closed form
        // tau = -(1/lambda) ln(1 + sqrt(2 lambda/gamma0) ln eta).
        let eta = 1.05 * q;
        let expected =
            -(1.0 / lambda) * (1.0 + (2.0 * lambda / gamma0).sqrt() * eta.ln()).ln();
        match sample_waiting_time(&r, 0.0, eta, 1e6).unwrap() {
            WaitingTime::Finite(tau) => {
                assert!((tau - expected).abs() / expected < 1e-6, "{tau} vs {expected}")
            }
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn beyond_horizon_is_reported() {
        let f = |_t: f64| 0.01;
        let wt = sample_waiting_time(&f, 0.0, 0.1, 1.0).unwrap();
        assert_eq!(wt, WaitingTime::NoJumpWithinHorizon);
    }

    #[test]
    fn zero_rate_never_jumps() {
        let f = |_t: f64| 0.0;
        let wt = sample_waiting_time(&f, 0.0, 0.5, 10.0).unwrap();
        assert_eq!(wt, WaitingTime::NoJumpWithinHorizon);
    }

    #[test]
    fn select_channel_examples() {
        assert_eq!(select_channel(&[1.0, 1.0], 0.25).unwrap(), 0);
        assert_eq!(select_channel(&[1.0, 1.0], 0.75).unwrap(), 1);
        assert_eq!(select_channel(&[5.0], 0.99).unwrap(), 0);
        assert_eq!(select_channel(&[0.0, 0.0], 0.5), Err(PdpError::AllRatesZero));
        assert!(matches!(
            select_channel(&[-1.0, 2.0], 0.5),
            Err(PdpError::NegativeRate { channel: 0, .. })
        ));
    }

    #[test]
    fn select_channel_empirical_frequency() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut zero_count = 0usize;
        for _ in 0..n {
            if select_channel(&[3.0, 1.0], rng.gen()).unwrap() == 0 {
                zero_count += 1;
            }
        }
        let freq = zero_count as f64 / n as f64;
        assert!((freq - 0.75).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn simpson_integrates_oscillatory_rate() {
        let f = |t: f64| 1.0 + t.sin().powi(2);
        let got = adaptive_simpson(&f, 0.0, 3.0, 1e-10);
        // int 1 + sin^2 = 3/2 t - sin(2t)/4
        let want = 1.5 * 3.0 - (6.0f64).sin() / 4.0;
        assert!((got - want).abs() < 1e-9);
    }
}
