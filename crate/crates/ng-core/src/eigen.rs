//! Thin deterministic wrapper around faer's self-adjoint eigensolvers.
//!
//! faer is pinned to sequential execution the first time any decomposition
//! runs, so eigenvalues (and everything derived from them) are bitwise
//! reproducible regardless of how many threads the caller owns.

use faer::{c64, Mat, Side};
use ndarray::Array2;
use num_complex::Complex64;
use std::sync::Once;

fn ensure_sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn to_faer(h: &Array2<Complex64>) -> Mat<c64> {
    Mat::from_fn(h.nrows(), h.ncols(), |i, j| {
        let z = h[[i, j]];
        c64::new(z.re, z.im)
    })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn eigvalsh(h: &Array2<Complex64>) -> Vec<f64> {
    ensure_sequential();
    let m = to_faer(h);
    let mut vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("self-adjoint eigenvalue computation failed");
    vals.sort_by(f64::total_cmp);
    vals
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Returns `(values, vectors)` with eigenvalues ascending and the k-th
/// eigenvector in column k of `vectors`.
pub(crate) fn eigh(h: &Array2<Complex64>) -> (Vec<f64>, Array2<Complex64>) {
    ensure_sequential();
    let n = h.nrows();
    let m = to_faer(h);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigendecomposition failed");
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values: Vec<f64> = order.iter().map(|&k| s[k].re).collect();
    let mut vectors = Array2::<Complex64>::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            let z = u[(i, k)];
            vectors[[i, col]] = Complex64::new(z.re, z.im);
        }
    }
    (values, vectors)
}

/// Eigendecomposition of a real symmetric matrix (used for Jacobi matrices of
/// orthogonal polynomials). Returns `(values, first_row_of_vectors)` with
/// eigenvalues ascending.
pub(crate) fn eigh_sym_first_row(t: &Array2<f64>) -> (Vec<f64>, Vec<f64>) {
    ensure_sequential();
    let n = t.nrows();
    let m = Mat::<f64>::from_fn(n, n, |i, j| t[[i, j]]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigendecomposition failed");
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let first_row: Vec<f64> = order.iter().map(|&k| u[(0, k)]).collect();
    (values, first_row)
}
