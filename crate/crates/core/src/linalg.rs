//! Dense complex linear algebra helpers shared by the decomposition and the
//! reference integrators.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;

pub type C64 = Complex64;

/// C = A * B for square row-major complex matrices, parallelized over row
/// blocks. The reference integrator multiplies 512x512 matrices inside an
/// adaptive stepper, which is too slow through a generic fallback.
pub fn matmul(a: ArrayView2<C64>, b: ArrayView2<C64>) -> Array2<C64> {
    let (n, k) = a.dim();
    let (kb, m) = b.dim();
    assert_eq!(k, kb, "inner dimensions must agree");
    let a_slice = a.as_slice().expect("matmul expects standard layout");
    let b_slice = b.as_slice().expect("matmul expects standard layout");
    let mut c = vec![C64::new(0.0, 0.0); n * m];

    // Row-major A times row-major B: walk B row by row so the inner loop is
    // contiguous in both B and C.
    let do_row_block = |(block, c_block): (usize, &mut [C64])| {
        let rows = c_block.len() / m;
        let row0 = block * ROW_BLOCK;
        for r in 0..rows {
            let i = row0 + r;
            let c_row = &mut c_block[r * m..(r + 1) * m];
            for p in 0..k {
                let aip = a_slice[i * k + p];
                if aip.re == 0.0 && aip.im == 0.0 {
                    continue;
                }
                let b_row = &b_slice[p * m..(p + 1) * m];
                for (cv, bv) in c_row.iter_mut().zip(b_row) {
                    *cv += aip * bv;
                }
            }
        }
    };

    const ROW_BLOCK: usize = 16;
    if n * m * k > 1 << 18 {
        c.par_chunks_mut(ROW_BLOCK * m).enumerate().for_each(do_row_block);
    } else {
        c.chunks_mut(ROW_BLOCK * m).enumerate().for_each(do_row_block);
    }
    Array2::from_shape_vec((n, m), c).unwrap()
}

/// Conjugate transpose.
pub fn dagger(a: ArrayView2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((a.ncols(), a.nrows()));
    for ((i, j), v) in a.indexed_iter() {
        out[(j, i)] = v.conj();
    }
    out
}

/// -i [h, rho]
pub fn commutator_rhs(h: ArrayView2<C64>, rho: ArrayView2<C64>) -> Array2<C64> {
    let mut out = matmul(h, rho);
    let hr = matmul(rho, h);
    out -= &hr;
    out.mapv_inplace(|z| C64::new(0.0, -1.0) * z);
    out
}

/// Kronecker product a (x) b.
pub fn kron(a: ArrayView2<C64>, b: ArrayView2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ((i, j), &av) in a.indexed_iter() {
        for ((p, q), &bv) in b.indexed_iter() {
            out[(i * rb + p, j * cb + q)] = av * bv;
        }
    }
    out
}

/// Partial trace over the environment factor: rho acts on H_S (x) H_E with
/// `dim_e` trailing dimensions per system index.
pub fn partial_trace_env(rho: ArrayView2<C64>, dim_s: usize, dim_e: usize) -> Array2<C64> {
    assert_eq!(rho.nrows(), dim_s * dim_e);
    let mut out = Array2::zeros((dim_s, dim_s));
    for i in 0..dim_s {
        for j in 0..dim_s {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..dim_e {
                acc += rho[(i * dim_e + n, j * dim_e + n)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

pub fn trace(a: ArrayView2<C64>) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Largest entrywise modulus.
pub fn max_abs(a: ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermiticity defect max |a - a^dag| entrywise.
pub fn hermiticity_defect(a: ArrayView2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for ((i, j), v) in a.indexed_iter() {
        worst = worst.max((v - a[(j, i)].conj()).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_matches_small_reference() {
        let a = array![[c(1., 1.), c(2., 0.)], [c(0., -1.), c(3., 2.)]];
        let b = array![[c(0., 1.), c(1., 0.)], [c(2., 2.), c(0., -3.)]];
        let ab = matmul(a.view(), b.view());
        // hand-computed
        assert!((ab[(0, 0)] - c(3., 5.)).norm() < 1e-14);
        assert!((ab[(0, 1)] - c(1., -5.)).norm() < 1e-14);
        assert!((ab[(1, 0)] - c(3., 10.)).norm() < 1e-14);
        assert!((ab[(1, 1)] - c(6., -10.)).norm() < 1e-14);
    }

    #[test]
    fn kron_and_partial_trace_roundtrip() {
        let sys = array![[c(0.25, 0.), c(0.1, 0.2)], [c(0.1, -0.2), c(0.75, 0.)]];
        let env = array![[c(0.5, 0.), c(0., 0.)], [c(0., 0.), c(0.5, 0.)]];
        let joint = kron(sys.view(), env.view());
        let reduced = partial_trace_env(joint.view(), 2, 2);
        for ((i, j), v) in reduced.indexed_iter() {
            assert!((v - sys[(i, j)]).norm() < 1e-14);
        }
    }

    #[test]
    fn commutator_of_commuting_matrices_vanishes() {
        let a = array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(2., 0.)]];
        let rhs = commutator_rhs(a.view(), a.view());
        assert!(max_abs(rhs.view()) < 1e-15);
    }
}
