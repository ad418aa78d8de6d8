//! State vectors, product-state pairs, and the decomposition of an arbitrary
//! density matrix into weighted pairs of product states.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{trace, C64};

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("input matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix dimension {0} does not factor as dim_s {1} * dim_e {2}")]
    BadFactorization(usize, usize, usize),
    #[error("trace deviates from one by {0:.3e}")]
    TraceDeviation(f64),
    #[error("state vector must have dim >= 1")]
    EmptyState,
}

/// Dense complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self, StateError> {
        if amps.is_empty() {
            return Err(StateError::EmptyState);
        }
        Ok(Self { amps })
    }

    /// Basis vector |i> in a `dim`-dimensional space.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, s: C64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    /// Apply a dense operator, out-of-place.
    pub fn apply(&self, op: ArrayView2<C64>) -> Result<StateVector, StateError> {
        if op.ncols() != self.dim() {
            return Err(StateError::DimMismatch(op.ncols(), self.dim()));
        }
        let mut out = vec![C64::new(0.0, 0.0); op.nrows()];
        for (i, row) in op.outer_iter().enumerate() {
            out[i] = row.iter().zip(&self.amps).map(|(o, a)| o * a).sum();
        }
        StateVector::new(out)
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }
}

/// <a|b>, conjugate-linear in the first argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64, StateError> {
    if a.dim() != b.dim() {
        return Err(StateError::DimMismatch(a.dim(), b.dim()));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// The pair of product states driving one trajectory. The two branches are
/// statistically independent; nothing in the engine couples their draws.
#[derive(Debug, Clone)]
pub struct ProductPair<E> {
    pub psi: [StateVector; 2],
    pub env: [E; 2],
    pub t: f64,
}

impl<E> ProductPair<E> {
    pub fn new(psi1: StateVector, env1: E, psi2: StateVector, env2: E) -> Self {
        Self { psi: [psi1, psi2], env: [env1, env2], t: 0.0 }
    }
}

/// One term of a density-matrix decomposition.
#[derive(Debug, Clone)]
pub struct WeightedPair {
    pub pair: ProductPair<StateVector>,
    pub probability: f64,
}

/// Options for [`decompose_density`].
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Entries with modulus below this are dropped.
    pub cutoff: f64,
    /// Allowed deviation of trace(rho) from one.
    pub trace_tol: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { cutoff: 1e-14, trace_tol: 1e-10 }
    }
}

/// Write a density matrix on H_S (x) H_E as a probability-weighted family of
/// product-state pairs whose weighted dyadic sum reproduces the input.
///
/// Entry rho_{ijnm} = |rho| e^{2i phi} contributes a pair built from basis
/// products (i,n) and (j,m) carrying phases +phi and -phi; phi is taken as
/// arg(rho)/2 with arg in (-pi, pi]. The scalar sqrt(S * |rho|) sits on the
/// system factor, with S the sum of all retained moduli, so that probability
/// |rho|/S times the dyadic recovers the entry. Enumeration is dense; this is
/// meant for small initial states.
pub fn decompose_density(
    rho: ArrayView2<C64>,
    dim_s: usize,
    dim_e: usize,
    opts: DecomposeOptions,
) -> Result<Vec<WeightedPair>, StateError> {
    if rho.nrows() != rho.ncols() {
        return Err(StateError::NotSquare(rho.nrows(), rho.ncols()));
    }
    if rho.nrows() != dim_s * dim_e {
        return Err(StateError::BadFactorization(rho.nrows(), dim_s, dim_e));
    }
    let tr = trace(rho);
    let defect = (tr - C64::new(1.0, 0.0)).norm();
    if defect > opts.trace_tol {
        return Err(StateError::TraceDeviation(defect));
    }

    struct Term {
        i: usize,
        j: usize,
        n: usize,
        m: usize,
        modulus: f64,
        half_phase: f64,
    }
    let mut terms = Vec::new();
    let mut total = 0.0f64;
    for i in 0..dim_s {
        for j in 0..dim_s {
            for n in 0..dim_e {
                for m in 0..dim_e {
                    let entry = rho[(i * dim_e + n, j * dim_e + m)];
                    let modulus = entry.norm();
                    if modulus <= opts.cutoff {
                        continue;
                    }
                    terms.push(Term { i, j, n, m, modulus, half_phase: entry.arg() / 2.0 });
                    total += modulus;
                }
            }
        }
    }

    let pairs = terms
        .into_iter()
        .map(|t| {
            let scalar = (total * t.modulus).sqrt();
            let phase1 = C64::from_polar(scalar, t.half_phase);
            let phase2 = C64::from_polar(scalar, -t.half_phase);
            let mut psi1 = StateVector::basis(dim_s, t.i);
            psi1.scale(phase1);
            let mut psi2 = StateVector::basis(dim_s, t.j);
            psi2.scale(phase2);
            let env1 = StateVector::basis(dim_e, t.n);
            let env2 = StateVector::basis(dim_e, t.m);
            WeightedPair {
                pair: ProductPair::new(psi1, env1, psi2, env2),
                probability: t.modulus / total,
            }
        })
        .collect();
    Ok(pairs)
}

/// Sum p_lambda |Phi_1><Phi_2| back into a dense matrix; the inverse of
/// [`decompose_density`] and the oracle for it.
pub fn resum_pairs(pairs: &[WeightedPair], dim_s: usize, dim_e: usize) -> Array2<C64> {
    let dim = dim_s * dim_e;
    let mut rho = Array2::zeros((dim, dim));
    for wp in pairs {
        let phi1 = wp.pair.psi[0].tensor(&wp.pair.env[0]);
        let phi2 = wp.pair.psi[1].tensor(&wp.pair.env[1]);
        for (r, a) in phi1.amps().iter().enumerate() {
            for (c, b) in phi2.amps().iter().enumerate() {
                rho[(r, c)] += wp.probability * a * b.conj();
            }
        }
    }
    rho
}

/// Draw one pair index from the decomposition by CDF inversion; `u` uniform
/// in (0,1). Ties break toward the lower index.
pub fn sample_pair_index(pairs: &[WeightedPair], u: f64) -> usize {
    let mut acc = 0.0;
    for (idx, wp) in pairs.iter().enumerate() {
        acc += wp.probability;
        if u <= acc {
            return idx;
        }
    }
    pairs.len() - 1
}

/// Convenience: the density matrix of a pure product state.
pub fn pure_product_density(psi: &StateVector, env: &StateVector) -> Array2<C64> {
    let phi = psi.tensor(env);
    let n = phi.dim();
    let mut rho = Array2::zeros((n, n));
    for (r, a) in phi.amps().iter().enumerate() {
        for (c, b) in phi.amps().iter().enumerate() {
            rho[(r, c)] = a * b.conj();
        }
    }
    rho
}

/// rho = (1/d) I as a dense matrix, for building maximally mixed factors.
pub fn maximally_mixed(dim: usize) -> Array2<C64> {
    Array2::eye(dim).mapv(|z: C64| z / dim as f64)
}
