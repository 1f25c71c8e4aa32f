//! Truncated Fock-space representations and photon-number cutoff policies.
//!
//! States live in the span of `|0>..|n_max>`. Constructors guarantee that the
//! only deviation from the exact infinite-dimensional object is the loss of
//! photon-number tail mass beyond the cutoff; [`choose_cutoff`] and
//! [`mixture_cutoff`] pick the smallest cutoff whose tail mass is below a
//! caller-supplied tolerance, using the exact displaced-thermal photon-number
//! distribution evaluated by a stable scaled-Laguerre recurrence.

use crate::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Default photon-number tail tolerance for cutoff selection.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Hard cap for cutoff searches; reaching it means the requested tolerance is
/// unattainable in a sane truncated simulation.
const CUTOFF_CAP: usize = 16_384;

/// Thermal-occupation weights below this threshold are dropped when building
/// displaced-thermal states (the discarded mass is
/// far below any supported tail tolerance).
const THERMAL_WEIGHT_CUT: f64 = 1e-16;

/// Compensated (Kahan) accumulator used wherever long sums feed tolerances
/// tighter than plain summation error.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// `ln(k!)` for `k = 0..=n`, accumulated with compensation so the absolute
/// error stays near one ulp of the value even for large `n`.
pub(crate) fn log_factorial_table(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = KahanSum::default();
    table.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        table.push(acc.value());
    }
    table
}

/// A pure state expanded over `|0>..|n_max>`.
#[derive(Debug, Clone)]
pub struct FockKet {
    /// `amplitudes[j] = <j|psi>`.
    pub amplitudes: Array1<Complex64>,
}

impl FockKet {
    /// Largest Fock index kept.
    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Squared norm of the truncated ket.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = KahanSum::default();
        for a in self.amplitudes.iter() {
            acc.add(a.norm_sqr());
        }
        acc.value()
    }

    /// Norm deficit `1 - <psi|psi>`; equals the photon-number tail mass
    /// beyond the cutoff for states truncated from normalized ones.
    pub fn norm_deficit(&self) -> f64 {
        1.0 - self.norm_sq()
    }

    /// Rank-one density matrix `|psi><psi|`.
    pub fn outer(&self) -> DensityMatrix {
        let d = self.amplitudes.len();
        let mut entries = Array2::<Complex64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                entries[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { entries }
    }
}

/// A (sub-normalized) density operator on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    /// `entries[[m, n]] = <m|rho|n>`.
    pub entries: Array2<Complex64>,
}

impl DensityMatrix {
    /// Wraps an array, requiring it to be square.
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    /// All-zero operator on `|0>..|n_max>`.
    pub fn zeros(n_max: usize) -> Self {
        Self {
            entries: Array2::zeros((n_max + 1, n_max + 1)),
        }
    }

    /// Dimension of the truncated space (`n_max + 1`).
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest Fock index kept.
    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn trace(&self) -> Complex64 {
        let mut re = KahanSum::default();
        let mut im = KahanSum::default();
        for i in 0..self.dim() {
            let z = self.entries[[i, i]];
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// Projects onto the Hermitian part, `(A + A^dag)/2`. Channel actions call
    /// this after every application so floating-point asymmetry cannot
    /// accumulate.
    pub fn hermitize(&mut self) {
        let d = self.dim();
        for i in 0..d {
            for j in (i + 1)..d {
                let upper = self.entries[[i, j]];
                let lower = self.entries[[j, i]];
                let sym = 0.5 * (upper + lower.conj());
                self.entries[[i, j]] = sym;
                self.entries[[j, i]] = sym.conj();
            }
            let diag = self.entries[[i, i]];
            self.entries[[i, i]] = Complex64::new(diag.re, 0.0);
        }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let defect = (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm();
                worst = worst.max(defect);
            }
        }
        // The defect of the (i, j)/(j, i) pair counts once; halve to match
        // the entrywise deviation of either entry from the hermitized value.
        0.5 * worst
    }

    /// Checks the state invariants: Hermitian to 1e-12 entrywise, trace within
    /// `10 * tail_tol` of one, and no eigenvalue below -1e-10.
    pub fn validate(&self, tail_tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "hermiticity_defect",
                value: defect,
            });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 10.0 * tail_tol || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "trace",
                value: tr.re,
            });
        }
        let min_eig = crate::eigen::eigvalsh(&self.entries)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::InvalidState {
                min_eigenvalue: min_eig,
            });
        }
        Ok(())
    }

    /// `sum_n n rho_nn` (not renormalized by the trace).
    pub fn mean_photon_number(&self) -> f64 {
        let mut acc = KahanSum::default();
        for n in 0..self.dim() {
            acc.add(n as f64 * self.entries[[n, n]].re);
        }
        acc.value()
    }

    /// `self += weight * other`, requiring matching cutoffs.
    pub fn scaled_add(&mut self, weight: f64, other: &DensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::CutoffMismatch {
                left: self.n_max(),
                right: other.n_max(),
            });
        }
        self.entries.zip_mut_with(&other.entries, |a, &b| {
            *a += weight * b;
        });
        Ok(())
    }
}

/// Coherent state `|x>` truncated at `n_max`.
///
/// Amplitudes are `e^{-|x|^2/2} x^j / sqrt(j!)`, evaluated in log-polar form
/// with a compensated log-factorial accumulator so the truncated norm deficit
/// tracks the exact Poisson tail to ~1e-14.
pub fn coherent_ket(x: Complex64, n_max: usize) -> FockKet {
    let mut amplitudes = Array1::<Complex64>::zeros(n_max + 1);
    let s = x.norm_sqr();
    if s == 0.0 {
        amplitudes[0] = Complex64::new(1.0, 0.0);
        return FockKet { amplitudes };
    }
    let log_abs = x.norm().ln();
    let phase = x.arg();
    let mut log_fact = KahanSum::default();
    for j in 0..=n_max {
        if j > 0 {
            log_fact.add((j as f64).ln());
        }
        let log_mag = -0.5 * s + j as f64 * log_abs - 0.5 * log_fact.value();
        amplitudes[j] = Complex64::from_polar(log_mag.exp(), j as f64 * phase);
    }
    FockKet { amplitudes }
}

/// Thermal state with mean photon number `nbar`, truncated at `n_max`.
///
/// Diagonal `nbar^n / (nbar+1)^{n+1}`; the trace deficit is exactly the
/// geometric tail `(nbar/(nbar+1))^{n_max+1}`.
pub fn thermal_fock(nbar: f64, n_max: usize) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "nbar",
            value: nbar,
        });
    }
    let mut rho = DensityMatrix::zeros(n_max);
    let ratio = nbar / (nbar + 1.0);
    let mut q = 1.0 / (nbar + 1.0);
    for n in 0..=n_max {
        rho.entries[[n, n]] = Complex64::new(q, 0.0);
        q *= ratio;
    }
    Ok(rho)
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the standard three-term
/// recurrence in the degree.
fn generalized_laguerre(n: usize, k: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Column `n` of the displacement operator: `<m|D(alpha)|n>` for
/// `m = 0..=n_max`, via the Laguerre closed form with log-domain prefactors.
fn displacement_column(
    alpha: Complex64,
    n: usize,
    n_max: usize,
    log_fact: &[f64],
) -> Array1<Complex64> {
    let s = alpha.norm_sqr();
    let log_abs = alpha.norm().ln();
    let phase = alpha.arg();
    let mut column = Array1::<Complex64>::zeros(n_max + 1);
    for m in 0..=n_max {
        let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
        let k = hi - lo;
        let log_pref = 0.5 * (log_fact[lo] - log_fact[hi]) + k as f64 * log_abs - 0.5 * s;
        let laguerre = generalized_laguerre(lo, k as f64, s);
        let magnitude = log_pref.exp() * laguerre;
        // m >= n carries alpha^{m-n}; m < n carries (-conj(alpha))^{n-m}.
        let angle = if m >= n {
            k as f64 * phase
        } else {
            k as f64 * (std::f64::consts::PI - phase)
        };
        column[m] = Complex64::from_polar(magnitude.abs(), angle)
            * if magnitude < 0.0 { -1.0 } else { 1.0 };
    }
    column
}

/// Accumulates `weight * D(alpha) rho_th(nbar) D(alpha)^dag` into `out`,
/// truncating the thermal occupation ladder where its weight drops below
/// numerical relevance. Shared by [`displaced_thermal_fock`] and the
/// thermal-loss channel.
pub(crate) fn displaced_thermal_accumulate(
    out: &mut DensityMatrix,
    weight: f64,
    alpha: Complex64,
    nbar: f64,
    log_fact: &[f64],
) {
    let n_max = out.n_max();
    if alpha.norm_sqr() < 1e-300 {
        // D(0) = I: the component is exactly thermal (diagonal).
        let ratio = nbar / (nbar + 1.0);
        let mut q = 1.0 / (nbar + 1.0);
        for n in 0..=n_max {
            out.entries[[n, n]] += Complex64::new(weight * q, 0.0);
            q *= ratio;
        }
        return;
    }
    let ratio = nbar / (nbar + 1.0);
    let mut q = 1.0 / (nbar + 1.0);
    let mut k = 0usize;
    while k <= n_max && q >= THERMAL_WEIGHT_CUT {
        let column = displacement_column(alpha, k, n_max, log_fact);
        let scale = weight * q;
        for i in 0..=n_max {
            let row_factor = scale * column[i];
            if row_factor.norm_sqr() == 0.0 {
                continue;
            }
            let row = out.entries.row_mut(i);
            let row_slice = row.into_slice().expect("contiguous row");
            for (j, entry) in row_slice.iter_mut().enumerate() {
                *entry += row_factor * column[j].conj();
            }
        }
        q *= ratio;
        k += 1;
    }
}

/// Displaced thermal state `D(alpha) rho_th(nbar) D(alpha)^dag` truncated at
/// `n_max`.
pub fn displaced_thermal_fock(
    alpha: Complex64,
    nbar: f64,
    n_max: usize,
) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "nbar",
            value: nbar,
        });
    }
    let mut rho = DensityMatrix::zeros(n_max);
    let log_fact = log_factorial_table(n_max);
    displaced_thermal_accumulate(&mut rho, 1.0, alpha, nbar, &log_fact);
    rho.hermitize();
    Ok(rho)
}

/// Mixture `sum_i p_i |psi_i><psi_i|` of pure states sharing one cutoff.
pub fn density_from_pure_ensemble(kets: &[FockKet], probs: &[f64]) -> Result<DensityMatrix> {
    if kets.is_empty() {
        return Err(Error::InvalidProbabilities { sum: 0.0 });
    }
    if kets.len() != probs.len() {
        return Err(Error::LengthMismatch {
            amplitudes: kets.len(),
            probs: probs.len(),
        });
    }
    let dim = kets[0].amplitudes.len();
    for ket in kets {
        if ket.amplitudes.len() != dim {
            return Err(Error::CutoffMismatch {
                left: dim - 1,
                right: ket.amplitudes.len() - 1,
            });
        }
    }
    let mut sum = KahanSum::default();
    for &p in probs {
        if !(p > 0.0) {
            return Err(Error::InvalidProbabilities { sum: p });
        }
        sum.add(p);
    }
    if (sum.value() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities { sum: sum.value() });
    }
    let mut rho = DensityMatrix::zeros(dim - 1);
    for (ket, &p) in kets.iter().zip(probs) {
        for i in 0..dim {
            let row_factor = p * ket.amplitudes[i];
            if row_factor.norm_sqr() == 0.0 {
                continue;
            }
            let row = rho.entries.row_mut(i);
            let row_slice = row.into_slice().expect("contiguous row");
            for (j, entry) in row_slice.iter_mut().enumerate() {
                *entry += row_factor * ket.amplitudes[j].conj();
            }
        }
    }
    rho.hermitize();
    Ok(rho)
}

/// Streaming photon-number distribution `P(n)` of a displaced thermal state
/// with displacement magnitude `|alpha| = sqrt(s)` and thermal occupation `N`.
///
/// `P(n) = (N^n / (1+N)^{n+1}) e^{-s/(1+N)} L_n(-y)`, `y = s / (N (1+N))`.
/// The iterator advances the scaled recurrence `T_n = (N/(1+N))^n L_n(-y)`,
/// which has nonnegative dominant terms and is stable upward.
struct PhotonPmf {
    mode: PmfMode,
    n: usize,
}

enum PmfMode {
    /// Zero displacement: geometric (Bose-Einstein) distribution.
    Geometric { ratio: f64, next: f64 },
    /// Zero (or negligible) thermal part: Poisson distribution.
    Poisson { s: f64, next: f64 },
    /// General displaced-thermal via the scaled-Laguerre recurrence.
    General {
        ratio: f64,
        y: f64,
        scale: f64,
        t_prev: f64,
        t_cur: f64,
    },
}

impl PhotonPmf {
    fn new(abs_alpha: f64, nbar: f64) -> Self {
        let s = abs_alpha * abs_alpha;
        let mode = if s < 1e-300 {
            PmfMode::Geometric {
                ratio: nbar / (nbar + 1.0),
                next: 1.0 / (nbar + 1.0),
            }
        } else if nbar < 1e-12 {
            PmfMode::Poisson {
                s,
                next: (-s).exp(),
            }
        } else {
            let ratio = nbar / (nbar + 1.0);
            let y = s / (nbar * (nbar + 1.0));
            PmfMode::General {
                ratio,
                y,
                scale: (-s / (nbar + 1.0)).exp() / (nbar + 1.0),
                t_prev: 0.0,
                t_cur: 1.0,
            }
        };
        Self { mode, n: 0 }
    }
}

impl Iterator for PhotonPmf {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let n = self.n;
        self.n += 1;
        let value = match &mut self.mode {
            PmfMode::Geometric { ratio, next } => {
                let value = *next;
                *next *= *ratio;
                value
            }
            PmfMode::Poisson { s, next } => {
                let value = *next;
                *next *= *s / (n as f64 + 1.0);
                value
            }
            PmfMode::General {
                ratio,
                y,
                scale,
                t_prev,
                t_cur,
            } => {
                let value = *scale * *t_cur;
                let nf = n as f64;
                let t_next = ((2.0 * nf + 1.0 + *y) * *ratio * *t_cur
                    - nf * *ratio * *ratio * *t_prev)
                    / (nf + 1.0);
                *t_prev = *t_cur;
                *t_cur = t_next;
                value
            }
        };
        Some(value)
    }
}

/// Photon-number distribution `P(0..=n_max)` of a displaced thermal state.
pub fn displaced_thermal_pmf(abs_alpha: f64, nbar: f64, n_max: usize) -> Vec<f64> {
    PhotonPmf::new(abs_alpha, nbar).take(n_max + 1).collect()
}

fn validate_cutoff_inputs(nbar: f64, tail_tol: f64) -> Result<()> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "nbar",
            value: nbar,
        });
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_tol",
            value: tail_tol,
        });
    }
    Ok(())
}

/// Smallest `n_max` whose cumulative displaced-thermal photon-number mass
/// reaches `1 - tail_tol` for displacement magnitude `max_abs_amplitude` and
/// thermal occupation `mean_thermal_photons`.
pub fn choose_cutoff(
    max_abs_amplitude: f64,
    mean_thermal_photons: f64,
    tail_tol: f64,
) -> Result<usize> {
    if !(max_abs_amplitude >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "max_abs_amplitude",
            value: max_abs_amplitude,
        });
    }
    validate_cutoff_inputs(mean_thermal_photons, tail_tol)?;
    let mut pmf = PhotonPmf::new(max_abs_amplitude, mean_thermal_photons);
    let mut cum = KahanSum::default();
    for n in 0..CUTOFF_CAP {
        cum.add(pmf.next().expect("pmf iterator is infinite"));
        if cum.value() >= 1.0 - tail_tol {
            return Ok(n);
        }
    }
    Err(Error::CutoffSearchFailed {
        cap: CUTOFF_CAP,
        tail_tol,
    })
}

/// Smallest `n_max` whose probability-weighted tail over a mixture of
/// displaced thermal components is below `tail_tol`.
///
/// `components` lists `(|alpha_i|, p_i)`. Weighting the per-component tails
/// by their mixture probabilities keeps the cutoff driven by where the state
/// actually lives instead of by the rarest outer component, while still
/// bounding the total truncated trace by `tail_tol`.
pub fn mixture_cutoff(
    components: &[(f64, f64)],
    mean_thermal_photons: f64,
    tail_tol: f64,
) -> Result<usize> {
    validate_cutoff_inputs(mean_thermal_photons, tail_tol)?;
    if components.is_empty() {
        return Err(Error::InvalidProbabilities { sum: 0.0 });
    }
    let mut weight_sum = KahanSum::default();
    for &(abs, p) in components {
        if !(abs >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "max_abs_amplitude",
                value: abs,
            });
        }
        if !(p > 0.0) {
            return Err(Error::InvalidProbabilities { sum: p });
        }
        weight_sum.add(p);
    }
    if (weight_sum.value() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidProbabilities {
            sum: weight_sum.value(),
        });
    }
    let mut pmfs: Vec<(f64, PhotonPmf)> = components
        .iter()
        .map(|&(abs, p)| (p, PhotonPmf::new(abs, mean_thermal_photons)))
        .collect();
    let mut cum = KahanSum::default();
    for n in 0..CUTOFF_CAP {
        let mut step = 0.0;
        for (p, pmf) in pmfs.iter_mut() {
            step += *p * pmf.next().expect("pmf iterator is infinite");
        }
        cum.add(step);
        if cum.value() >= 1.0 - tail_tol {
            return Ok(n);
        }
    }
    Err(Error::CutoffSearchFailed {
        cap: CUTOFF_CAP,
        tail_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent Poisson tail via direct compensated summation of the pmf
    /// recurrence (no shared log-factorial path with `coherent_ket`).
    fn poisson_tail(s: f64, n_max: usize) -> f64 {
        let mut term = (-s).exp();
        let mut cum = KahanSum::default();
        for n in 0..=n_max {
            cum.add(term);
            term *= s / (n as f64 + 1.0);
        }
        1.0 - cum.value()
    }

    #[test]
    fn coherent_ket_matches_closed_form() {
        let ket = coherent_ket(Complex64::new(1.0, 0.0), 10);
        let e_half = (-0.5f64).exp();
        assert_abs_diff_eq!(ket.amplitudes[0].re, e_half, epsilon = 1e-15);
        assert_abs_diff_eq!(ket.amplitudes[1].re, e_half, epsilon = 1e-15);
        assert_abs_diff_eq!(ket.amplitudes[2].re, e_half / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(ket.amplitudes[3].re, e_half / 6f64.sqrt(), epsilon = 1e-15);
        for a in ket.amplitudes.iter() {
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn coherent_ket_carries_phase() {
        // x = i: amplitude j carries phase i^j.
        let ket = coherent_ket(Complex64::new(0.0, 1.0), 4);
        let e_half = (-0.5f64).exp();
        assert_abs_diff_eq!(ket.amplitudes[0].re, e_half, epsilon = 1e-15);
        assert_abs_diff_eq!(ket.amplitudes[1].im, e_half, epsilon = 1e-15);
        assert_abs_diff_eq!(ket.amplitudes[2].re, -e_half / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(ket.amplitudes[3].im, -e_half / 6f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn coherent_norm_deficit_is_poisson_tail() {
        let x = Complex64::new(0.0, 2.0);
        let ket = coherent_ket(x, 60);
        assert!((ket.norm_sq() - 1.0).abs() < 1e-12);
        for n_max in [4, 8, 15, 30] {
            let ket = coherent_ket(x, n_max);
            let tail = poisson_tail(4.0, n_max);
            assert_abs_diff_eq!(ket.norm_deficit(), tail, epsilon = 1e-13);
        }
    }

    #[test]
    fn vacuum_ket_is_exact() {
        let ket = coherent_ket(Complex64::new(0.0, 0.0), 5);
        assert_eq!(ket.amplitudes[0], Complex64::new(1.0, 0.0));
        assert_eq!(ket.norm_deficit(), 0.0);
    }

    #[test]
    fn thermal_fock_geometric_diagonal() {
        let nbar = 1.0;
        let rho = thermal_fock(nbar, 64).unwrap();
        // Diagonal q_n = nbar^n/(nbar+1)^{n+1} = 2^{-(n+1)} for nbar = 1.
        for n in [0usize, 1, 5, 20] {
            assert_abs_diff_eq!(
                rho.entries[[n, n]].re,
                0.5f64.powi(n as i32 + 1),
                epsilon = 1e-16
            );
        }
        let deficit = 1.0 - rho.trace().re;
        assert_abs_diff_eq!(deficit, 0.5f64.powi(65), epsilon = 1e-18);
        assert!(rho.validate(1e-10).is_ok());
    }

    #[test]
    fn thermal_rejects_negative_nbar() {
        assert!(thermal_fock(-0.1, 10).is_err());
    }

    /// Displacement matrix by the independent raising recurrence
    /// `sqrt(m+1) d_{m+1,n} = alpha d_{m,n} + sqrt(n) d_{m,n-1}`, seeded by
    /// `d_{0,n} = (-conj(alpha))^n e^{-|alpha|^2/2} / sqrt(n!)`.
    fn displacement_by_recurrence(alpha: Complex64, dim: usize) -> Array2<Complex64> {
        let mut d = Array2::<Complex64>::zeros((dim, dim));
        let s = alpha.norm_sqr();
        let mut top = Complex64::new((-0.5 * s).exp(), 0.0);
        for n in 0..dim {
            d[[0, n]] = top;
            top *= -alpha.conj() / ((n as f64 + 1.0).sqrt());
        }
        for m in 0..dim - 1 {
            for n in 0..dim {
                let lowered = if n > 0 {
                    (n as f64).sqrt() * d[[m, n - 1]]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                d[[m + 1, n]] = (alpha * d[[m, n]] + lowered) / ((m as f64 + 1.0).sqrt());
            }
        }
        d
    }

    #[test]
    fn displacement_column_matches_recurrence_oracle() {
        let alpha = Complex64::new(0.9, -0.55);
        let dim = 41;
        let oracle = displacement_by_recurrence(alpha, dim);
        let log_fact = log_factorial_table(dim - 1);
        for n in [0usize, 1, 3, 10, 25, 40] {
            let column = displacement_column(alpha, n, dim - 1, &log_fact);
            for m in 0..dim {
                // The recurrence accumulates ~40 rounding steps, so allow a
                // few ulps beyond 1e-12.
                let diff = (column[m] - oracle[[m, n]]).norm();
                assert!(
                    diff < 5e-12,
                    "element ({m},{n}) differs by {diff:e}"
                );
            }
        }
    }

    #[test]
    fn displacement_columns_nearly_orthonormal() {
        let alpha = Complex64::new(1.2, 0.4);
        let dim = 81;
        let log_fact = log_factorial_table(dim - 1);
        let c0 = displacement_column(alpha, 0, dim - 1, &log_fact);
        let c1 = displacement_column(alpha, 1, dim - 1, &log_fact);
        let n0: f64 = c0.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = c1.iter().map(|z| z.norm_sqr()).sum();
        let cross: Complex64 = c0
            .iter()
            .zip(c1.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((n0 - 1.0).abs() < 1e-10);
        assert!((n1 - 1.0).abs() < 1e-10);
        assert!(cross.norm() < 1e-10);
    }

    #[test]
    fn displaced_thermal_reduces_to_coherent_at_zero_nbar() {
        let alpha = Complex64::new(0.8, 0.6);
        let n_max = 30;
        let rho = displaced_thermal_fock(alpha, 0.0, n_max).unwrap();
        let pure = coherent_ket(alpha, n_max).outer();
        let mut worst: f64 = 0.0;
        for i in 0..=n_max {
            for j in 0..=n_max {
                worst = worst.max((rho.entries[[i, j]] - pure.entries[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-13, "worst entry deviation {worst:e}");
    }

    #[test]
    fn displaced_thermal_matches_brute_oracle() {
        // Brute force: D rho_th D^dag with D from the independent recurrence
        // and the thermal ladder summed far beyond the weight cut.
        let alpha = Complex64::new(0.7, 0.3);
        let nbar = 0.5;
        let dim = 41;
        let d = displacement_by_recurrence(alpha, dim);
        let mut brute = Array2::<Complex64>::zeros((dim, dim));
        let ratio = nbar / (nbar + 1.0);
        let mut q = 1.0 / (nbar + 1.0);
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    brute[[i, j]] += q * d[[i, k]] * d[[j, k]].conj();
                }
            }
            q *= ratio;
        }
        let rho = displaced_thermal_fock(alpha, nbar, dim - 1).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((rho.entries[[i, j]] - brute[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-12, "worst entry deviation {worst:e}");
        assert!(rho.validate(1e-8).is_ok());
    }

    #[test]
    fn ensemble_matches_manual_mixture() {
        let a = coherent_ket(Complex64::new(1.0, 0.0), 25);
        let b = coherent_ket(Complex64::new(-1.0, 0.0), 25);
        let rho = density_from_pure_ensemble(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        for i in [0usize, 1, 2, 7] {
            for j in [0usize, 1, 3] {
                let expect = 0.5 * a.amplitudes[i] * a.amplitudes[j].conj()
                    + 0.5 * b.amplitudes[i] * b.amplitudes[j].conj();
                assert!((rho.entries[[i, j]] - expect).norm() < 1e-15);
            }
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert_eq!(rho.hermiticity_defect(), 0.0);
    }

    #[test]
    fn ensemble_rejects_mixed_cutoffs_and_bad_probs() {
        let a = coherent_ket(Complex64::new(1.0, 0.0), 10);
        let b = coherent_ket(Complex64::new(1.0, 0.0), 12);
        assert!(matches!(
            density_from_pure_ensemble(&[a.clone(), b], &[0.5, 0.5]),
            Err(Error::CutoffMismatch { .. })
        ));
        let c = coherent_ket(Complex64::new(1.0, 0.0), 10);
        assert!(matches!(
            density_from_pure_ensemble(&[a, c], &[0.7, 0.7]),
            Err(Error::InvalidProbabilities { .. })
        ));
    }

    #[test]
    fn pmf_closed_forms_at_low_orders() {
        let (a, nbar) = (1.3f64, 0.8f64);
        let s = a * a;
        let y = s / (nbar * (nbar + 1.0));
        let pmf = displaced_thermal_pmf(a, nbar, 200);
        let p0 = (-s / (nbar + 1.0)).exp() / (nbar + 1.0);
        let p1 = p0 * (nbar / (nbar + 1.0)) * (1.0 + y);
        assert_abs_diff_eq!(pmf[0], p0, epsilon = 1e-15);
        assert_abs_diff_eq!(pmf[1], p1, epsilon = 1e-15);
        assert!(pmf.iter().all(|&p| p >= 0.0));
        let total: f64 = pmf.iter().sum();
        assert!(total <= 1.0 + 1e-12);
        assert!(1.0 - total < 1e-12);
    }

    #[test]
    fn pmf_reduces_to_poisson_for_small_nbar() {
        let a = 1.7f64;
        let s = a * a;
        let pmf = displaced_thermal_pmf(a, 1e-13, 40);
        let mut poisson = (-s).exp();
        for (n, &p) in pmf.iter().enumerate() {
            assert_abs_diff_eq!(p, poisson, epsilon = 1e-10);
            poisson *= s / (n as f64 + 1.0);
        }
    }

    #[test]
    fn pmf_matches_diagonal_of_displaced_thermal() {
        let alpha = Complex64::new(-0.9, 1.1);
        let nbar = 0.6;
        let rho = displaced_thermal_fock(alpha, nbar, 35).unwrap();
        let pmf = displaced_thermal_pmf(alpha.norm(), nbar, 35);
        for (n, &p) in pmf.iter().enumerate() {
            assert_abs_diff_eq!(rho.entries[[n, n]].re, p, epsilon = 1e-12);
        }
    }

    #[test]
    fn choose_cutoff_matches_direct_poisson_scan() {
        // Independent scan of the Poisson cumulative for |alpha| = 2, nbar = 0.
        let s = 4.0f64;
        let tol = 1e-12;
        let mut term = (-s).exp();
        let mut cum = KahanSum::default();
        let mut expected = None;
        for n in 0..200 {
            cum.add(term);
            if cum.value() >= 1.0 - tol {
                expected = Some(n);
                break;
            }
            term *= s / (n as f64 + 1.0);
        }
        let expected = expected.unwrap();
        assert_eq!(choose_cutoff(2.0, 0.0, tol).unwrap(), expected);
    }

    #[test]
    fn choose_cutoff_monotone_and_degenerate() {
        assert_eq!(choose_cutoff(0.0, 0.0, 1e-10).unwrap(), 0);
        let loose = choose_cutoff(2.0, 0.0, 1e-6).unwrap();
        let tight = choose_cutoff(2.0, 0.0, 1e-12).unwrap();
        assert!(tight > loose);
        let small = choose_cutoff(1.0, 0.0, 1e-10).unwrap();
        let large = choose_cutoff(3.0, 0.0, 1e-10).unwrap();
        assert!(large > small);
        let hotter = choose_cutoff(1.0, 0.5, 1e-10).unwrap();
        assert!(hotter > small);
    }

    #[test]
    fn choose_cutoff_bounds_actual_tail() {
        for (a, nbar, tol) in [
            (2.0, 0.0, 1e-10),
            (3.5, 0.2, 1e-8),
            (0.0, 1.5, 1e-10),
            (1.2, 0.9, 1e-12),
        ] {
            let n_max = choose_cutoff(a, nbar, tol).unwrap();
            let pmf = displaced_thermal_pmf(a, nbar, n_max);
            let mut cum = KahanSum::default();
            for p in pmf {
                cum.add(p);
            }
            assert!(1.0 - cum.value() <= tol * (1.0 + 1e-9));
            // Minimality: one level lower must violate the tolerance.
            if n_max > 0 {
                let pmf = displaced_thermal_pmf(a, nbar, n_max - 1);
                let mut cum = KahanSum::default();
                for p in pmf {
                    cum.add(p);
                }
                assert!(1.0 - cum.value() > tol * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn mixture_cutoff_between_min_and_max_component() {
        let comps = [(0.5, 0.9), (3.0, 0.1)];
        let tol = 1e-10;
        let mixed = mixture_cutoff(&comps, 0.0, tol).unwrap();
        let lo = choose_cutoff(0.5, 0.0, tol).unwrap();
        let hi = choose_cutoff(3.0, 0.0, tol).unwrap();
        assert!(mixed >= lo);
        assert!(mixed <= hi);
        // Weighted tail at the returned cutoff is within tolerance.
        let mut tail = 0.0;
        for &(a, p) in &comps {
            let pmf = displaced_thermal_pmf(a, 0.0, mixed);
            let cum: f64 = pmf.iter().sum();
            tail += p * (1.0 - cum);
        }
        assert!(tail <= tol * (1.0 + 1e-9));
    }

    #[test]
    fn scaled_add_requires_matching_dims() {
        let mut a = DensityMatrix::zeros(4);
        let b = DensityMatrix::zeros(5);
        assert!(matches!(
            a.scaled_add(1.0, &b),
            Err(Error::CutoffMismatch { .. })
        ));
    }

    #[test]
    fn hermitize_symmetrizes_and_validate_catches_bad_states() {
        let mut m = DensityMatrix::zeros(1);
        m.entries[[0, 0]] = Complex64::new(0.6, 0.0);
        m.entries[[1, 1]] = Complex64::new(0.4, 0.0);
        m.entries[[0, 1]] = Complex64::new(0.3, 0.1);
        m.entries[[1, 0]] = Complex64::new(0.3, 0.1); // not Hermitian
        assert!(m.hermiticity_defect() > 1e-3);
        m.hermitize();
        assert_eq!(m.hermiticity_defect(), 0.0);
        assert_abs_diff_eq!(m.entries[[0, 1]].re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(m.entries[[0, 1]].im, 0.0, epsilon = 1e-15);

        // A matrix with a clearly negative eigenvalue fails validation.
        let mut bad = DensityMatrix::zeros(1);
        bad.entries[[0, 0]] = Complex64::new(1.2, 0.0);
        bad.entries[[1, 1]] = Complex64::new(-0.2, 0.0);
        assert!(matches!(
            bad.validate(1e-10),
            Err(Error::InvalidState { .. })
        ));
    }

    #[test]
    fn mean_photon_number_of_thermal() {
        let rho = thermal_fock(0.7, 120).unwrap();
        assert_abs_diff_eq!(rho.mean_photon_number(), 0.7, epsilon = 1e-10);
    }
}
