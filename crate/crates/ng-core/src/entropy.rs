//! Entropies, Gaussian moments, and the entropic non-Gaussianity measure.
//!
//! The non-Gaussianity of a state `rho` is `delta_vn(rho) = S(rho_G) - S(rho)`
//! where `rho_G` is the Gaussian state with the same first and second
//! quadrature moments. With the vacuum-normalized conventions used here the
//! Gaussian reference of a phase-space-symmetric state is thermal, so
//! `S(rho_G) = g(nu)` with `nu = sqrt(det cov)` and `g` the bosonic entropy
//! function. Everything is reported in bits.
//!
//! For constellations of coherent states the spectrum of the average state
//! equals the spectrum of the Gram matrix of the weighted pure components, so
//! [`gram_entropy`] computes `S(rho)` without any Fock-space truncation. This
//! is the preferred path for input states; the Fock route serves as an
//! independent cross-check.

use crate::constellation::Constellation;
use crate::fock::{DensityMatrix, KahanSum};
use crate::{eigen, log2, Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Eigenvalues at or below this threshold are excluded from entropy sums and
/// operator logarithms (they are truncation noise around zero).
pub const CLAMP_TOL: f64 = 1e-12;

/// Eigenvalues below `-NEGATIVE_EIG_TOL` mean the matrix is not a state.
const NEGATIVE_EIG_TOL: f64 = 1e-8;

/// `delta_vn` values in `(-DELTA_VN_FLOOR, 0)` are clamped to zero; anything
/// at or below `-DELTA_VN_FLOOR` is reported as an inconsistency.
const DELTA_VN_FLOOR: f64 = 1e-6;

/// Bosonic entropy function in bits:
/// `g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2)`.
///
/// `nu` within `1e-8` of one (from either side) snaps to the vacuum value 0;
/// values below `1 - 1e-8` are a domain error.
pub fn bosonic_g(nu: f64) -> Result<f64> {
    if !(nu >= 1.0 - 1e-8) {
        return Err(Error::SymplecticDomain { nu });
    }
    if nu < 1.0 + 1e-8 {
        return Ok(0.0);
    }
    let up = 0.5 * (nu + 1.0);
    let down = 0.5 * (nu - 1.0);
    Ok(up * log2(up) - down * log2(down))
}

/// Shannon entropy in bits of an eigenvalue list, with the shared clamping
/// policy: reject states with eigenvalues below `-1e-8`, skip eigenvalues at
/// or below [`CLAMP_TOL`].
pub(crate) fn shannon_from_eigs(eigs: &[f64]) -> Result<f64> {
    let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_EIG_TOL {
        return Err(Error::InvalidState {
            min_eigenvalue: min,
        });
    }
    let mut acc = KahanSum::default();
    for &lambda in eigs {
        if lambda > CLAMP_TOL {
            acc.add(-lambda * log2(lambda));
        }
    }
    Ok(acc.value())
}

/// Von Neumann entropy `S(rho) = -tr(rho log2 rho)` in bits, via Hermitian
/// eigendecomposition.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    shannon_from_eigs(&eigen::eigvalsh(&rho.entries))
}

/// First and second quadrature moments in the vacuum-normalized convention
/// `q = a + a^dag`, `p = i (a^dag - a)`, vacuum covariance = identity.
#[derive(Debug, Clone, Copy)]
pub struct GaussianMoments {
    /// `(<q>, <p>)`.
    pub mean: [f64; 2],
    /// Symmetric 2x2 covariance matrix.
    pub cov: [[f64; 2]; 2],
}

impl GaussianMoments {
    pub fn det(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    /// Symplectic eigenvalue `nu = sqrt(det cov)` (one mode). Clamped at zero
    /// if rounding pushed the determinant negative; the entropy call then
    /// reports the domain error.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.det().max(0.0).sqrt()
    }
}

/// Entropy in bits of the Gaussian state with the given moments.
pub fn gaussian_entropy(moments: &GaussianMoments) -> Result<f64> {
    bosonic_g(moments.symplectic_eigenvalue())
}

/// Assembles quadrature moments from the mode-operator expectations
/// `<a>`, `<a^2>`, `<a^dag a>`.
pub(crate) fn moments_from_expectations(a: Complex64, a2: Complex64, n: f64) -> GaussianMoments {
    let mean_q = 2.0 * a.re;
    let mean_p = 2.0 * a.im;
    let g11 = 1.0 + 2.0 * n + 2.0 * a2.re - mean_q * mean_q;
    let g22 = 1.0 + 2.0 * n - 2.0 * a2.re - mean_p * mean_p;
    let g12 = 2.0 * a2.im - mean_q * mean_p;
    GaussianMoments {
        mean: [mean_q, mean_p],
        cov: [[g11, g12], [g12, g22]],
    }
}

/// Quadrature moments of a truncated Fock state, from the sub/superdiagonal
/// traces `tr(a rho) = sum_m sqrt(m) rho_{m,m-1}`,
/// `tr(a^2 rho) = sum_m sqrt(m(m-1)) rho_{m,m-2}`,
/// `tr(a^dag a rho) = sum_n n rho_{nn}`, renormalized by the trace so a
/// slightly deficient truncation does not bias the moments.
pub fn moments_from_fock(rho: &DensityMatrix) -> GaussianMoments {
    let dim = rho.dim();
    let trace = rho.trace().re;
    let mut a_re = KahanSum::default();
    let mut a_im = KahanSum::default();
    let mut a2_re = KahanSum::default();
    let mut a2_im = KahanSum::default();
    let mut n_acc = KahanSum::default();
    for m in 0..dim {
        let mf = m as f64;
        n_acc.add(mf * rho.entries[[m, m]].re);
        if m >= 1 {
            let z = mf.sqrt() * rho.entries[[m, m - 1]];
            a_re.add(z.re);
            a_im.add(z.im);
        }
        if m >= 2 {
            let z = (mf * (mf - 1.0)).sqrt() * rho.entries[[m, m - 2]];
            a2_re.add(z.re);
            a2_im.add(z.im);
        }
    }
    let a = Complex64::new(a_re.value(), a_im.value()) / trace;
    let a2 = Complex64::new(a2_re.value(), a2_im.value()) / trace;
    let n = n_acc.value() / trace;
    moments_from_expectations(a, a2, n)
}

/// Quadrature moments of the average state of a constellation, assembled from
/// the exact ensemble expectations `<a> = sum p a_i`, `<a^2> = sum p a_i^2`,
/// `<a^dag a> = sum p |a_i|^2` — no truncation involved.
pub fn constellation_moments(c: &Constellation) -> GaussianMoments {
    let mut a_re = KahanSum::default();
    let mut a_im = KahanSum::default();
    let mut a2_re = KahanSum::default();
    let mut a2_im = KahanSum::default();
    for (alpha, &p) in c.amplitudes().iter().zip(c.probs()) {
        a_re.add(p * alpha.re);
        a_im.add(p * alpha.im);
        let sq = alpha * alpha;
        a2_re.add(p * sq.re);
        a2_im.add(p * sq.im);
    }
    moments_from_expectations(
        Complex64::new(a_re.value(), a_im.value()),
        Complex64::new(a2_re.value(), a2_im.value()),
        c.variance(),
    )
}

/// Gram matrix of the weighted coherent components:
/// `G_{mn} = sqrt(p_m p_n) <a_m|a_n>` with the exact coherent overlap
/// `<a|b> = exp(conj(a) b - |a|^2/2 - |b|^2/2)`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: Array2<Complex64>,
}

/// Builds the Gram matrix of a constellation. Hermitian and unit-trace by
/// construction; its spectrum equals the spectrum of the average state.
pub fn gram_matrix(c: &Constellation) -> GramMatrix {
    let n = c.len();
    let amplitudes = c.amplitudes();
    let probs = c.probs();
    let mut entries = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        entries[[i, i]] = Complex64::new(probs[i], 0.0);
        for j in (i + 1)..n {
            let a = amplitudes[i];
            let b = amplitudes[j];
            let overlap =
                (a.conj() * b - Complex64::new(0.5 * (a.norm_sqr() + b.norm_sqr()), 0.0)).exp();
            let entry = (probs[i] * probs[j]).sqrt() * overlap;
            entries[[i, j]] = entry;
            entries[[j, i]] = entry.conj();
        }
    }
    GramMatrix { entries }
}

/// Entropy in bits of the constellation's average state, from the Gram
/// spectrum (truncation-free).
pub fn gram_entropy(g: &GramMatrix) -> Result<f64> {
    shannon_from_eigs(&eigen::eigvalsh(&g.entries))
}

/// Non-Gaussianity `delta_vn(rho) = S(rho_G) - S(rho)` in bits, with the
/// Gaussian reference entropy from the state's own numerical moments.
///
/// Values in `(-1e-6, 0)` are rounding noise and clamp to zero; anything at or
/// below `-1e-6` indicates inconsistent inputs and errors out.
pub fn delta_vn(rho: &DensityMatrix) -> Result<f64> {
    let gaussian = gaussian_entropy(&moments_from_fock(rho))?;
    let actual = von_neumann_entropy(rho)?;
    finish_delta(gaussian - actual)
}

/// Non-Gaussianity of a constellation's average state via the Gram spectrum
/// and the exact ensemble moments (no Fock truncation anywhere).
pub fn delta_vn_constellation(c: &Constellation) -> Result<f64> {
    let gaussian = gaussian_entropy(&constellation_moments(c))?;
    let actual = gram_entropy(&gram_matrix(c))?;
    finish_delta(gaussian - actual)
}

fn finish_delta(value: f64) -> Result<f64> {
    if value <= -DELTA_VN_FLOOR {
        return Err(Error::NegativeNonGaussianity { value });
    }
    Ok(value.max(0.0))
}

/// Trace distance `(1/2) ||a - b||_1` via the eigenvalues of the Hermitian
/// difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::CutoffMismatch {
            left: a.n_max(),
            right: b.n_max(),
        });
    }
    let diff = &a.entries - &b.entries;
    let eigs = eigen::eigvalsh(&diff);
    let mut acc = KahanSum::default();
    for lambda in eigs {
        acc.add(lambda.abs());
    }
    Ok(0.5 * acc.value())
}
