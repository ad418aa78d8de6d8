//! Ensemble statistics: paired and factorized estimators of bilinear
//! expectation values with their error formulas, reduced-density-matrix
//! reconstruction, and fluctuation diagnostics.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::C64;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("need at least two samples, have {0}")]
    TooFewSamples(u64),
    #[error("branches are correlated; the factorized estimator is biased here")]
    CorrelatedBranches,
    #[error("empty ensemble")]
    EmptyEnsemble,
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum - self.carry
    }
}

/// First and second moments of a complex sample, componentwise.
#[derive(Debug, Clone, Default)]
pub struct ComplexMoments {
    n: u64,
    sum_re: KahanSum,
    sum_im: KahanSum,
    sum_re2: KahanSum,
    sum_im2: KahanSum,
    sum_cross: KahanSum,
}

impl ComplexMoments {
    pub fn push(&mut self, z: C64) {
        self.n += 1;
        self.sum_re.add(z.re);
        self.sum_im.add(z.im);
        self.sum_re2.add(z.re * z.re);
        self.sum_im2.add(z.im * z.im);
        self.sum_cross.add(z.re * z.im);
    }

    pub fn merge(&mut self, other: &ComplexMoments) {
        self.n += other.n;
        self.sum_re.merge(&other.sum_re);
        self.sum_im.merge(&other.sum_im);
        self.sum_re2.merge(&other.sum_re2);
        self.sum_im2.merge(&other.sum_im2);
        self.sum_cross.merge(&other.sum_cross);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> C64 {
        let n = self.n as f64;
        C64::new(self.sum_re.value() / n, self.sum_im.value() / n)
    }

    /// Var(Re z) as a population (1/n) variance, clamped at zero.
    pub fn var_re(&self) -> f64 {
        let n = self.n as f64;
        let m = self.sum_re.value() / n;
        (self.sum_re2.value() / n - m * m).max(0.0)
    }

    pub fn var_im(&self) -> f64 {
        let n = self.n as f64;
        let m = self.sum_im.value() / n;
        (self.sum_im2.value() / n - m * m).max(0.0)
    }

    pub fn cov_re_im(&self) -> f64 {
        let n = self.n as f64;
        self.sum_cross.value() / n - (self.sum_re.value() / n) * (self.sum_im.value() / n)
    }

    /// Total complex variance E|z|^2 - |E z|^2.
    pub fn var_total(&self) -> f64 {
        (self.var_re() + self.var_im()).max(0.0)
    }
}

/// One scalar estimate with its error figures.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: C64,
    /// Total complex standard error (the paper-style sigma).
    pub sigma: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub n: u64,
}

/// Whether the two branches of the pair were drawn independently. Sharp
/// initial states give independent branches; a shared initial draw (as in the
/// spin-bath sampler) correlates them and invalidates the factorized
/// estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchCoupling {
    Independent,
    Correlated,
}

/// Accumulator for one bilinear estimand E(conj(b) a) at one time point,
/// where a and b are the per-branch amplitudes of a trajectory.
#[derive(Debug, Clone)]
pub struct PairAccumulator {
    coupling: BranchCoupling,
    a: ComplexMoments,
    b: ComplexMoments,
    /// Paired product conj(b) * a.
    c: ComplexMoments,
}

impl PairAccumulator {
    pub fn new(coupling: BranchCoupling) -> Self {
        Self {
            coupling,
            a: ComplexMoments::default(),
            b: ComplexMoments::default(),
            c: ComplexMoments::default(),
        }
    }

    pub fn push(&mut self, a: C64, b: C64) {
        self.a.push(a);
        self.b.push(b);
        self.c.push(b.conj() * a);
    }

    pub fn merge(&mut self, other: &PairAccumulator) {
        debug_assert_eq!(self.coupling, other.coupling);
        self.a.merge(&other.a);
        self.b.merge(&other.b);
        self.c.merge(&other.c);
    }

    pub fn count(&self) -> u64 {
        self.c.count()
    }

    pub fn coupling(&self) -> BranchCoupling {
        self.coupling
    }

    /// Paired-sample estimator: mean of conj(b_r) a_r. The componentwise
    /// standard errors come from the sample itself and hold regardless of
    /// branch coupling; `sigma` is the plug-in error formula
    /// sqrt((Var a Var b + Var a |Eb|^2 + Var b |Ea|^2) / N), which reduces
    /// to sqrt(Var(a)/N) sqrt(Var(a) + 2|Ea|^2) for equal branch moments.
    pub fn paired(&self) -> Result<Estimate, EstimatorError> {
        let n = self.c.count();
        if n < 2 {
            return Err(EstimatorError::TooFewSamples(n));
        }
        let nf = n as f64;
        let va = self.a.var_total();
        let vb = self.b.var_total();
        let ea2 = self.a.mean().norm_sqr();
        let eb2 = self.b.mean().norm_sqr();
        let sigma = ((va * vb + va * eb2 + vb * ea2) / nf).sqrt();
        Ok(Estimate {
            value: self.c.mean(),
            sigma,
            stderr_re: (self.c.var_re() / nf).sqrt(),
            stderr_im: (self.c.var_im() / nf).sqrt(),
            n,
        })
    }

    /// Factorized estimator: conj(mean b) * mean a, algebraically equal to
    /// the N^2 double sum over all branch pairings. Error formula
    /// sqrt((Var a |Eb|^2 + Var b |Ea|^2)/N); never larger than the paired
    /// sigma. Componentwise errors by linear propagation through the product
    /// of means.
    pub fn product(&self) -> Result<Estimate, EstimatorError> {
        if self.coupling == BranchCoupling::Correlated {
            return Err(EstimatorError::CorrelatedBranches);
        }
        let n = self.c.count();
        if n < 2 {
            return Err(EstimatorError::TooFewSamples(n));
        }
        let nf = n as f64;
        let ma = self.a.mean();
        let mb = self.b.mean();
        let va = self.a.var_total();
        let vb = self.b.var_total();
        let sigma = ((va * mb.norm_sqr() + vb * ma.norm_sqr()) / nf).sqrt();

        // value = conj(mb) ma; propagate component covariances of both means.
        let (br, bi) = (mb.re, mb.im);
        let (ar, ai) = (ma.re, ma.im);
        let (var_ar, var_ai, cov_a) = (self.a.var_re(), self.a.var_im(), self.a.cov_re_im());
        let (var_br, var_bi, cov_b) = (self.b.var_re(), self.b.var_im(), self.b.cov_re_im());
        // Re = br*ar + bi*ai, Im = br*ai - bi*ar
        let var_re = (br * br * var_ar
            + bi * bi * var_ai
            + 2.0 * br * bi * cov_a
            + ar * ar * var_br
            + ai * ai * var_bi
            + 2.0 * ar * ai * cov_b)
            / nf;
        let var_im = (br * br * var_ai + bi * bi * var_ar - 2.0 * br * bi * cov_a
            + ai * ai * var_br
            + ar * ar * var_bi
            - 2.0 * ar * ai * cov_b)
            / nf;
        Ok(Estimate {
            value: mb.conj() * ma,
            sigma,
            stderr_re: var_re.max(0.0).sqrt(),
            stderr_im: var_im.max(0.0).sqrt(),
            n,
        })
    }
}

/// Which estimator a run reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Paired,
    Product,
}

/// One emitted curve point: (t, value, componentwise standard errors, count).
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub t: f64,
    pub value: C64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub n: u64,
}

/// A bilinear estimand accumulated over a time grid.
#[derive(Debug, Clone)]
pub struct CurveAccumulator {
    grid: Vec<f64>,
    points: Vec<PairAccumulator>,
}

impl CurveAccumulator {
    pub fn new(grid: Vec<f64>, coupling: BranchCoupling) -> Self {
        let points = grid.iter().map(|_| PairAccumulator::new(coupling)).collect();
        Self { grid, points }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn push(&mut self, idx: usize, a: C64, b: C64) {
        self.points[idx].push(a, b);
    }

    pub fn merge(&mut self, other: &CurveAccumulator) {
        debug_assert_eq!(self.grid.len(), other.grid.len());
        for (p, q) in self.points.iter_mut().zip(&other.points) {
            p.merge(q);
        }
    }

    pub fn point(&self, idx: usize) -> &PairAccumulator {
        &self.points[idx]
    }

    pub fn curve(&self, kind: EstimatorKind) -> Result<Vec<CurvePoint>, EstimatorError> {
        self.grid
            .iter()
            .zip(&self.points)
            .map(|(&t, acc)| {
                let est = match kind {
                    EstimatorKind::Paired => acc.paired()?,
                    EstimatorKind::Product => acc.product()?,
                };
                Ok(CurvePoint {
                    t,
                    value: est.value,
                    stderr_re: est.stderr_re,
                    stderr_im: est.stderr_im,
                    n: est.n,
                })
            })
            .collect()
    }

    /// sigma_2 <= sigma_1 must hold pointwise on the same sample moments.
    pub fn sigma_ordering_holds(&self) -> bool {
        self.points.iter().all(|p| match (p.paired(), p.product()) {
            (Ok(e1), Ok(e2)) => e2.sigma <= e1.sigma * (1.0 + 1e-12),
            _ => true,
        })
    }
}

/// Moments of a real scalar sample (used for tr R"dag"R tracking).
#[derive(Debug, Clone, Default)]
pub struct RealMoments {
    n: u64,
    sum: KahanSum,
    sum_sq: KahanSum,
}

impl RealMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &RealMoments) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.n as f64
    }

    pub fn var(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        (self.sum_sq.value() / n - m * m).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.var() / self.n as f64).sqrt()
    }
}

/// Per-time-point fluctuation diagnostics: D^2(t) = E(tr R"dag"R) - tr rho^2
/// against the analytic bound tr rho^2 (e^{4 G0 t} - 1) + D^2(0) e^{4 G0 t}.
#[derive(Debug, Clone)]
pub struct FluctuationTracker {
    grid: Vec<f64>,
    /// Per trajectory and time point, tr R"dag"R = |Phi_1|^2 |Phi_2|^2.
    samples: Vec<RealMoments>,
    pub rate_bound: f64,
    pub tr_rho_sq: f64,
    pub d2_initial: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FluctuationPoint {
    pub t: f64,
    pub d2: f64,
    pub stderr: f64,
    pub bound: f64,
    /// estimate - 3 stderr exceeds the bound: a correctness alarm.
    pub violates_bound: bool,
}

impl FluctuationTracker {
    pub fn new(grid: Vec<f64>, rate_bound: f64, tr_rho_sq: f64, d2_initial: f64) -> Self {
        let samples = grid.iter().map(|_| RealMoments::default()).collect();
        Self { grid, samples, rate_bound, tr_rho_sq, d2_initial }
    }

    /// Push tr R"dag"R for one trajectory, given the log-norms of the two
    /// branch states: tr R"dag"R = exp(2 (ln|Phi_1| + ln|Phi_2|)).
    pub fn push_log_norms(&mut self, idx: usize, log_norm_1: f64, log_norm_2: f64) {
        self.samples[idx].push((2.0 * (log_norm_1 + log_norm_2)).exp());
    }

    pub fn merge(&mut self, other: &FluctuationTracker) {
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            a.merge(b);
        }
    }

    pub fn report(&self) -> Vec<FluctuationPoint> {
        self.grid
            .iter()
            .zip(&self.samples)
            .map(|(&t, m)| {
                let d2 = m.mean() - self.tr_rho_sq;
                let stderr = m.stderr();
                let growth = (4.0 * self.rate_bound * t).exp();
                let bound = self.tr_rho_sq * (growth - 1.0) + self.d2_initial * growth;
                FluctuationPoint { t, d2, stderr, bound, violates_bound: d2 - 3.0 * stderr > bound }
            })
            .collect()
    }

    pub fn any_violation(&self) -> bool {
        self.report().iter().any(|p| p.violates_bound)
    }
}

/// Reduced-density-matrix accumulator from paired samples
/// |psi_1><psi_2| <chi_2|chi_1>.
#[derive(Debug, Clone)]
pub struct RhoAccumulator {
    dim: usize,
    entries: Vec<ComplexMoments>,
}

impl RhoAccumulator {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: (0..dim * dim).map(|_| ComplexMoments::default()).collect() }
    }

    pub fn push(&mut self, psi1: &[C64], psi2: &[C64], env_overlap: C64) {
        debug_assert_eq!(psi1.len(), self.dim);
        debug_assert_eq!(psi2.len(), self.dim);
        for (i, a) in psi1.iter().enumerate() {
            for (j, b) in psi2.iter().enumerate() {
                self.entries[i * self.dim + j].push(a * b.conj() * env_overlap);
            }
        }
    }

    pub fn merge(&mut self, other: &RhoAccumulator) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.merge(b);
        }
    }

    pub fn count(&self) -> u64 {
        self.entries.first().map_or(0, |m| m.count())
    }

    /// Ensemble-mean matrix. The trace is reported as-is, not renormalized.
    pub fn mean(&self) -> Result<Array2<C64>, EstimatorError> {
        if self.count() == 0 {
            return Err(EstimatorError::EmptyEnsemble);
        }
        let mut out = Array2::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self.entries[i * self.dim + j].mean();
            }
        }
        Ok(out)
    }

    /// Componentwise standard errors per entry (re, im).
    pub fn stderr(&self, i: usize, j: usize) -> (f64, f64) {
        let m = &self.entries[i * self.dim + j];
        let n = m.count() as f64;
        ((m.var_re() / n).sqrt(), (m.var_im() / n).sqrt())
    }
}

/// Factorized-mean reconstruction for models with a dense total-state
/// representation: tr_E( E(Phi_1) E(Phi_2)^dag ).
#[derive(Debug, Clone)]
pub struct MeanStateAccumulator {
    dim_s: usize,
    dim_e: usize,
    phi1: Vec<ComplexMoments>,
    phi2: Vec<ComplexMoments>,
}

impl MeanStateAccumulator {
    pub fn new(dim_s: usize, dim_e: usize) -> Self {
        let make = || (0..dim_s * dim_e).map(|_| ComplexMoments::default()).collect();
        Self { dim_s, dim_e, phi1: make(), phi2: make() }
    }

    pub fn push(&mut self, phi1: &[C64], phi2: &[C64]) {
        debug_assert_eq!(phi1.len(), self.dim_s * self.dim_e);
        for (m, &z) in self.phi1.iter_mut().zip(phi1) {
            m.push(z);
        }
        for (m, &z) in self.phi2.iter_mut().zip(phi2) {
            m.push(z);
        }
    }

    pub fn merge(&mut self, other: &MeanStateAccumulator) {
        for (a, b) in self.phi1.iter_mut().zip(&other.phi1) {
            a.merge(b);
        }
        for (a, b) in self.phi2.iter_mut().zip(&other.phi2) {
            a.merge(b);
        }
    }

    pub fn mean_rho_s(&self) -> Result<Array2<C64>, EstimatorError> {
        if self.phi1.first().map_or(0, |m| m.count()) == 0 {
            return Err(EstimatorError::EmptyEnsemble);
        }
        let m1: Vec<C64> = self.phi1.iter().map(|m| m.mean()).collect();
        let m2: Vec<C64> = self.phi2.iter().map(|m| m.mean()).collect();
        let mut out = Array2::zeros((self.dim_s, self.dim_s));
        for i in 0..self.dim_s {
            for j in 0..self.dim_s {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..self.dim_e {
                    acc += m1[i * self.dim_e + n] * m2[j * self.dim_e + n].conj();
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;
    use rand::Rng;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let mut acc = PairAccumulator::new(BranchCoupling::Independent);
        for _ in 0..100 {
            acc.push(c(1.0, 0.0), c(1.0, 0.0));
        }
        let e1 = acc.paired().unwrap();
        assert_eq!(e1.value, c(1.0, 0.0));
        assert!(e1.sigma < 1e-12);
        let e2 = acc.product().unwrap();
        assert!((e2.value - c(1.0, 0.0)).norm() < 1e-14);
        assert!(e2.sigma < 1e-12);
    }

    #[test]
    fn unit_circle_samples_match_paired_mean() {
        // a_r = b_r on the unit circle: paired value is exactly 1.
        let mut acc = PairAccumulator::new(BranchCoupling::Independent);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let th: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let z = C64::from_polar(1.0, th);
            acc.push(z, z);
        }
        let e1 = acc.paired().unwrap();
        assert!((e1.value - c(1.0, 0.0)).norm() < 1e-12);
        // E(a) ~ 0, so sigma_1 is dominated by Var(a)/sqrt(N).
        let n = 1000.0f64;
        assert!((e1.sigma - (1.0 / n.sqrt())).abs() < 0.1);
    }

    #[test]
    fn sigma_ordering_is_algebraic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let mut acc = PairAccumulator::new(BranchCoupling::Independent);
            for _ in 0..50 {
                let a = c(rng.gen::<f64>() * 2.0 - 0.3, rng.gen::<f64>() - 0.5);
                let b = c(rng.gen::<f64>() * 2.0 - 0.3, rng.gen::<f64>() - 0.5);
                acc.push(a, b);
            }
            let e1 = acc.paired().unwrap();
            let e2 = acc.product().unwrap();
            assert!(e2.sigma <= e1.sigma + 1e-15);
        }
    }

    #[test]
    fn correlated_accumulator_rejects_product() {
        let mut acc = PairAccumulator::new(BranchCoupling::Correlated);
        acc.push(c(1., 0.), c(1., 0.));
        acc.push(c(0., 1.), c(0., 1.));
        assert_eq!(acc.product().unwrap_err(), EstimatorError::CorrelatedBranches);
        assert!(acc.paired().is_ok());
    }

    #[test]
    fn too_few_samples_error() {
        let mut acc = PairAccumulator::new(BranchCoupling::Independent);
        acc.push(c(1., 0.), c(1., 0.));
        assert_eq!(acc.paired().unwrap_err(), EstimatorError::TooFewSamples(1));
    }

    #[test]
    fn merge_is_order_independent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let samples: Vec<(C64, C64)> = (0..300)
            .map(|_| {
                (
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                )
            })
            .collect();
        // three chunks merged in two different orders
        let chunk = |r: std::ops::Range<usize>| {
            let mut acc = PairAccumulator::new(BranchCoupling::Independent);
            for &(a, b) in &samples[r] {
                acc.push(a, b);
            }
            acc
        };
        let (c0, c1, c2) = (chunk(0..100), chunk(100..200), chunk(200..300));
        let mut left = c0.clone();
        left.merge(&c1);
        left.merge(&c2);
        let mut right = c2.clone();
        right.merge(&c0);
        right.merge(&c1);
        let e_left = left.paired().unwrap();
        let e_right = right.paired().unwrap();
        assert!((e_left.value - e_right.value).norm() <= 1e-12 * e_left.value.norm().max(1.0));
        assert!((e_left.sigma - e_right.sigma).abs() <= 1e-12 * e_left.sigma.max(1.0));
    }

    #[test]
    fn repetition_spread_matches_sigma_formulas() {
        // i.i.d. complex Gaussian-ish a, b with nonzero mean: the observed
        // spread of each estimator over many repetitions must match its
        // reported error within 20%.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let reps = 400;
        let n = 400;
        let mut vals1 = Vec::new();
        let mut vals2 = Vec::new();
        let mut sig1 = 0.0;
        let mut sig2 = 0.0;
        let mut draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            // sum of 4 uniforms, roughly normal, mean 1.0+0.5i
            let g = |r: &mut rand_chacha::ChaCha8Rng| {
                (0..4).map(|_| r.gen::<f64>() - 0.5).sum::<f64>() / 2.0
            };
            c(1.0 + g(rng), 0.5 + g(rng))
        };
        for _ in 0..reps {
            let mut acc = PairAccumulator::new(BranchCoupling::Independent);
            for _ in 0..n {
                let a = draw(&mut rng);
                let b = draw(&mut rng);
                acc.push(a, b);
            }
            let e1 = acc.paired().unwrap();
            let e2 = acc.product().unwrap();
            vals1.push(e1.value);
            vals2.push(e2.value);
            sig1 += e1.sigma / reps as f64;
            sig2 += e2.sigma / reps as f64;
        }
        let spread = |vals: &[C64]| {
            let mean: C64 = vals.iter().sum::<C64>() / vals.len() as f64;
            (vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / vals.len() as f64).sqrt()
        };
        let s1 = spread(&vals1);
        let s2 = spread(&vals2);
        assert!((s1 / sig1 - 1.0).abs() < 0.2, "paired spread {s1} vs sigma {sig1}");
        assert!((s2 / sig2 - 1.0).abs() < 0.2, "product spread {s2} vs sigma {sig2}");
        assert!(sig2 < sig1);
    }

    #[test]
    fn rho_accumulator_sharp_initial_state() {
        let mut acc = RhoAccumulator::new(2);
        let e = StateVector::basis(2, 0);
        for _ in 0..10 {
            acc.push(e.amps(), e.amps(), c(1.0, 0.0));
        }
        let rho = acc.mean().unwrap();
        assert_eq!(rho[(0, 0)], c(1.0, 0.0));
        assert_eq!(rho[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn fluctuation_tracker_sharp_state_is_zero() {
        let mut tr = FluctuationTracker::new(vec![0.0], 1.0, 1.0, 0.0);
        for _ in 0..100 {
            tr.push_log_norms(0, 0.0, 0.0);
        }
        let rep = tr.report();
        assert!(rep[0].d2.abs() < 1e-12);
        assert!(!rep[0].violates_bound);
    }
}
