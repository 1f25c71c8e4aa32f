//! Secret-key rates for Gaussian-modulation CVQKD and the `epsilon_G` bound
//! on the rate loss of a discrete constellation.
//!
//! The Devetak–Winter rate against collective attacks, with Gaussian
//! modulation of variance `V_m`, heterodyne detection, and reverse
//! reconciliation, is `K = beta I_AB - chi_BE`, with both terms evaluated on
//! the entangling-cloner dilation of the thermal-loss channel. A discrete
//! constellation pays at most `epsilon_G` of that rate, and
//! `epsilon_G <= delta_vn(N(rho)) - D`, where `delta_vn` is the output
//! non-Gaussianity and `D` the classical shaping gap of the format at the
//! channel SNR. The [`delta_functional`] diagnostic evaluates the relative
//! entropy remainder `tr[N(rho) (log N(rho)^G - log N(rho^G))]`, which
//! vanishes identically for phase-covariant channels on isotropic inputs and
//! therefore measures pure truncation error.

use crate::channels::{phase_diffusion, thermal_loss_output, ChannelParams, ChannelSpec};
use crate::classical::{awgn_capacity, mi_1d};
use crate::constellation::Constellation;
use crate::eigen;
use crate::entropy::{
    bosonic_g, constellation_moments, delta_vn, delta_vn_constellation, moments_from_fock,
    CLAMP_TOL,
};
use crate::fock::{
    coherent_ket, density_from_pure_ensemble, mixture_cutoff, KahanSum, DEFAULT_TAIL_TOL,
};
use crate::{log2, Error, Result};

/// Symplectic eigenvalues may undershoot 1 by at most this before the
/// covariance is declared unphysical.
const NU_TOL: f64 = 1e-9;

/// Tolerance on the isotropy (phase balance) of a constellation's moments.
const ISOTROPY_TOL: f64 = 1e-9;

/// Heterodyne SNR of the thermal-loss channel for modulation variance `vm`:
/// `tau vm / (1 + xi)` with excess noise `xi = 2 nbar (1 - tau)`.
pub fn channel_snr(vm: f64, p: &ChannelParams) -> f64 {
    p.tau() * vm / (1.0 + p.excess_noise())
}

/// Devetak–Winter secret-key rate (bits per symbol) of Gaussian modulation
/// with variance `vm` over a thermal-loss channel, heterodyne detection, and
/// reconciliation efficiency `beta`.
///
/// For the pure-loss identity point (`tau = 1`, `nbar = 0`, `beta = 1`) this
/// reduces exactly to `log2(1 + vm)`. The rate may be negative when the
/// channel noise defeats the modulation.
pub fn gaussian_dw_rate(vm: f64, p: &ChannelParams, beta: f64) -> Result<f64> {
    if !(vm >= 0.0) || !vm.is_finite() {
        return Err(Error::InvalidParameter {
            name: "vm",
            value: vm,
        });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
        });
    }
    let v = 1.0 + 2.0 * vm;
    let w = p.tau() * v + (1.0 - p.tau()) * p.epsilon();
    let c2 = p.tau() * (v * v - 1.0);
    // Two-mode symplectic spectrum of the EPR state after one arm passes the
    // channel: Gamma = [[V I, c Z], [c Z, W I]].
    let delta = v * v + w * w - 2.0 * c2;
    let det = (v * w - c2) * (v * w - c2);
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let nu_plus = (0.5 * (delta + disc)).sqrt();
    let nu_minus = (0.5 * (delta - disc).max(0.0)).sqrt();
    // Conditional symplectic eigenvalue after heterodyne on the output arm.
    let nu_cond = v - c2 / (w + 1.0);
    for nu in [nu_plus, nu_minus, nu_cond] {
        if nu < 1.0 - NU_TOL {
            return Err(Error::UnphysicalCovariance {
                tau: p.tau(),
                nbar: p.nbar(),
                vm,
                nu,
            });
        }
    }
    let chi = bosonic_g(nu_plus)? + bosonic_g(nu_minus)? - bosonic_g(nu_cond)?;
    let snr = channel_snr(vm, p);
    Ok(beta * log2(1.0 + snr) - chi)
}

/// Options for [`epsilon_g_bound`].
#[derive(Debug, Clone, Copy)]
pub struct EpsilonGOptions {
    /// Photon-number tail mass allowed outside the Fock truncation.
    pub tail_tol: f64,
    /// Gauss–Hermite nodes for the mutual-information quadrature.
    pub quadrature_nodes: usize,
    /// Whether the shaping gap is taken against the complex-channel capacity
    /// (both quadrature axes) rather than a single real axis.
    pub complex_channel: bool,
}

impl Default for EpsilonGOptions {
    fn default() -> Self {
        Self {
            tail_tol: DEFAULT_TAIL_TOL,
            quadrature_nodes: 96,
            complex_channel: true,
        }
    }
}

/// Everything behind one `epsilon_G` evaluation.
#[derive(Debug, Clone)]
pub struct EpsilonGReport {
    /// Input non-Gaussianity (Gram-matrix route, truncation-free).
    pub delta_vn_in: f64,
    /// Output non-Gaussianity after the thermal-loss channel.
    pub delta_vn_out: f64,
    /// Classical shaping gap `D` of the format at the channel SNR.
    pub capacity_gap: f64,
    /// The bound `epsilon_G <= delta_vn_out - D` (not clamped).
    pub epsilon_g_upper: f64,
    /// Heterodyne SNR used for the classical terms.
    pub snr: f64,
    /// Fock cutoff used for the output state.
    pub n_max: usize,
    /// Whether the MI quadrature converged under node doubling.
    pub mi_converged: bool,
    /// Human-readable diagnostics (negative bound, non-converged MI).
    pub warnings: Vec<String>,
}

/// Upper bound on the secret-key-rate loss `epsilon_G` a product
/// constellation pays relative to ideal Gaussian modulation over the
/// thermal-loss channel `p`.
pub fn epsilon_g_bound(
    c: &Constellation,
    p: &ChannelParams,
    opts: &EpsilonGOptions,
) -> Result<EpsilonGReport> {
    let info = c.product().ok_or(Error::NonProductConstellation)?;
    let snr = channel_snr(c.variance(), p);

    let st = p.tau().sqrt();
    let components: Vec<(f64, f64)> = c
        .amplitudes()
        .iter()
        .zip(c.probs())
        .map(|(&a, &prob)| ((st * a).norm(), prob))
        .collect();
    let n_max = mixture_cutoff(&components, p.nbar() * (1.0 - p.tau()), opts.tail_tol)?;
    let rho_out = thermal_loss_output(c, p, n_max)?;
    rho_out.validate(opts.tail_tol)?;

    let delta_vn_in = delta_vn_constellation(c)?;
    let delta_vn_out = delta_vn(&rho_out)?;

    let axis_mi = mi_1d(&info.axis, snr, opts.quadrature_nodes)?;
    let (capacity, axes) = if opts.complex_channel {
        (awgn_capacity(snr, true)?, 2.0)
    } else {
        (awgn_capacity(snr, false)?, 1.0)
    };
    let capacity_gap = (capacity - axes * axis_mi.fine).max(0.0);

    let epsilon_g_upper = delta_vn_out - capacity_gap;
    let mut warnings = Vec::new();
    if !axis_mi.converged {
        warnings.push(format!(
            "axis mutual information not converged: |{:.3e}| between node counts {} and {}",
            axis_mi.coarse - axis_mi.fine,
            opts.quadrature_nodes,
            2 * opts.quadrature_nodes
        ));
    }
    if epsilon_g_upper < -1e-6 {
        warnings.push(format!(
            "epsilon_G upper bound is negative ({epsilon_g_upper:.3e}): shaping gap exceeds \
             output non-Gaussianity at these parameters"
        ));
    }
    Ok(EpsilonGReport {
        delta_vn_in,
        delta_vn_out,
        capacity_gap,
        epsilon_g_upper,
        snr,
        n_max,
        mi_converged: axis_mi.converged,
        warnings,
    })
}

/// Result of the relative-entropy remainder diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct DeltaFunctional {
    /// `tr[N(rho) (log2 N(rho)^G - log2 N(rho^G))]` on the numerical support.
    pub value: f64,
    /// Probability mass outside the spectral support (eigenvalues at or below
    /// the clamp threshold, plus truncated trace).
    pub excluded_mass: f64,
    /// Set when the excluded mass exceeds 1e-6.
    pub flagged: bool,
}

/// Evaluates `Delta(N, rho) = tr[N(rho) (log2 N(rho)^G - log2 N(rho^G))]` for
/// an isotropic constellation input.
///
/// Both Gaussianifications are thermal states here, so the operator
/// difference is linear in the number operator; for phase-covariant `N` the
/// two occupations coincide analytically and `Delta = 0`. The numerical value
/// therefore certifies that the Fock truncation and the moment recovery agree
/// — a nonzero result is discretization error, not physics.
pub fn delta_functional(
    c: &Constellation,
    channel: &ChannelSpec,
    tail_tol: f64,
) -> Result<DeltaFunctional> {
    let m_in = constellation_moments(c);
    let anisotropic = m_in.mean[0].abs() > ISOTROPY_TOL
        || m_in.mean[1].abs() > ISOTROPY_TOL
        || (m_in.cov[0][0] - m_in.cov[1][1]).abs() > ISOTROPY_TOL
        || m_in.cov[0][1].abs() > ISOTROPY_TOL;
    if anisotropic {
        return Err(Error::AnisotropicConstellation);
    }
    let vm = c.variance();

    // rho_out = N(rho); nbar_ref = thermal occupation of N(rho^G).
    let (rho_out, nbar_ref) = match channel {
        ChannelSpec::ThermalLoss(p) => {
            let st = p.tau().sqrt();
            let components: Vec<(f64, f64)> = c
                .amplitudes()
                .iter()
                .zip(c.probs())
                .map(|(&a, &prob)| ((st * a).norm(), prob))
                .collect();
            let n_max = mixture_cutoff(&components, p.nbar() * (1.0 - p.tau()), tail_tol)?;
            (
                thermal_loss_output(c, p, n_max)?,
                p.tau() * vm + (1.0 - p.tau()) * p.nbar(),
            )
        }
        ChannelSpec::PhaseDiffusion(p) => {
            let components: Vec<(f64, f64)> = c
                .amplitudes()
                .iter()
                .zip(c.probs())
                .map(|(&a, &prob)| (a.norm(), prob))
                .collect();
            let n_max = mixture_cutoff(&components, 0.0, tail_tol)?;
            let kets: Vec<_> = c
                .amplitudes()
                .iter()
                .map(|&a| coherent_ket(a, n_max))
                .collect();
            let rho_in = density_from_pure_ensemble(&kets, c.probs())?;
            (phase_diffusion(&rho_in, p), vm)
        }
    };

    // N(rho)^G from the numerically measured output moments.
    let m_out = moments_from_fock(&rho_out);
    let nbar_num = (0.5 * (m_out.symplectic_eigenvalue() - 1.0)).max(f64::MIN_POSITIVE);
    let nbar_ref = nbar_ref.max(f64::MIN_POSITIVE);

    // log2 of a thermal state is linear in the Fock level:
    // log2 q_n = n log2(nbar / (1 + nbar)) - log2(1 + nbar).
    let slope = log2(nbar_num / (1.0 + nbar_num)) - log2(nbar_ref / (1.0 + nbar_ref));
    let offset = log2(1.0 + nbar_ref) - log2(1.0 + nbar_num);

    let (eigs, vecs) = eigen::eigh(&rho_out.entries);
    let dim = rho_out.dim();
    let mut value = KahanSum::default();
    let mut kept = KahanSum::default();
    for (k, &lam) in eigs.iter().enumerate() {
        if lam <= CLAMP_TOL {
            continue;
        }
        kept.add(lam);
        let mut level = KahanSum::default();
        for n in 0..dim {
            level.add((slope * n as f64 + offset) * vecs[[n, k]].norm_sqr());
        }
        value.add(lam * level.value());
    }
    let excluded_mass = (1.0 - kept.value()).max(0.0);
    Ok(DeltaFunctional {
        value: value.value(),
        excluded_mass,
        flagged: excluded_mass > 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::PhaseDiffusionParams;
    use crate::constellation::{gauss_hermite_1d, qam_product, random_walk_1d, AxisShape};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use num_complex::Complex64;

    #[test]
    fn lossless_rate_is_shannon_capacity() {
        let p = ChannelParams::new(1.0, 0.0).unwrap();
        let k = gaussian_dw_rate(2.5, &p, 1.0).unwrap();
        assert_abs_diff_eq!(k, 3.5f64.log2(), epsilon = 1e-12);
        let k_beta = gaussian_dw_rate(2.5, &p, 0.95).unwrap();
        assert_abs_diff_eq!(k_beta, 0.95 * 3.5f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn rate_matches_hand_computed_point() {
        // vm = 2.5, tau = 0.2, nbar = 0: V = 6, W = 2, c^2 = 7, so
        // nu_+ = 5, nu_- = 1 exactly, nu_cond = 11/3, snr = 1/2:
        // K = log2(3/2) - g(5) + g(11/3).
        let p = ChannelParams::new(0.2, 0.0).unwrap();
        let k = gaussian_dw_rate(2.5, &p, 1.0).unwrap();
        let expected = 1.5f64.log2() - (3.0 * 3f64.log2() - 2.0)
            + (7.0 / 3.0) * (7.0f64 / 3.0).log2()
            - (4.0 / 3.0) * (4.0f64 / 3.0).log2();
        assert_abs_diff_eq!(k, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(k, 0.1289406493042737, epsilon = 1e-12);
    }

    /// Symplectic eigenvalues of a two-mode covariance via the Hermitian
    /// matrix `Gamma^{1/2} (i Omega) Gamma^{1/2}`, whose spectrum is
    /// `{+-nu_j}`.
    fn symplectic_eigs_4x4(gamma: &Array2<f64>) -> Vec<f64> {
        let n = 4;
        let gc = Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(gamma[[i, j]], 0.0));
        let (ev, u) = eigen::eigh(&gc);
        let mut sqrt_g = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += u[[i, k]] * ev[k].sqrt() * u[[j, k]].conj();
                }
                sqrt_g[[i, j]] = acc;
            }
        }
        let mut omega = Array2::<f64>::zeros((n, n));
        for b in 0..2 {
            omega[[2 * b, 2 * b + 1]] = 1.0;
            omega[[2 * b + 1, 2 * b]] = -1.0;
        }
        let i_omega =
            Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(0.0, omega[[i, j]]));
        let h = sqrt_g.dot(&i_omega).dot(&sqrt_g);
        let all = eigen::eigvalsh(&h);
        all.into_iter().filter(|&x| x > 0.0).collect()
    }

    #[test]
    fn rate_matches_symplectic_oracle() {
        for (vm, tau, nbar) in [(2.5, 0.2, 0.0), (1.7, 0.55, 0.3), (4.0, 0.9, 1.2)] {
            let p = ChannelParams::new(tau, nbar).unwrap();
            let v = 1.0 + 2.0 * vm;
            let w = tau * v + (1.0 - tau) * (2.0 * nbar + 1.0);
            let cc = (tau * (v * v - 1.0)).sqrt();
            let mut gamma = Array2::<f64>::zeros((4, 4));
            gamma[[0, 0]] = v;
            gamma[[1, 1]] = v;
            gamma[[2, 2]] = w;
            gamma[[3, 3]] = w;
            gamma[[0, 2]] = cc;
            gamma[[2, 0]] = cc;
            gamma[[1, 3]] = -cc;
            gamma[[3, 1]] = -cc;
            let nus = symplectic_eigs_4x4(&gamma);
            assert_eq!(nus.len(), 2);
            let nu_cond = v - cc * cc / (w + 1.0);
            let chi = bosonic_g(nus[1]).unwrap() + bosonic_g(nus[0]).unwrap()
                - bosonic_g(nu_cond).unwrap();
            let snr = tau * vm / (1.0 + 2.0 * nbar * (1.0 - tau));
            let expected = (1.0 + snr).log2() - chi;
            let k = gaussian_dw_rate(vm, &p, 1.0).unwrap();
            assert_abs_diff_eq!(k, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn rate_goes_negative_in_deep_thermal_noise() {
        let p = ChannelParams::new(0.5, 3.0).unwrap();
        let k = gaussian_dw_rate(2.5, &p, 1.0).unwrap();
        assert!(k < 0.0);
    }

    #[test]
    fn rate_rejects_bad_parameters() {
        let p = ChannelParams::new(0.5, 0.0).unwrap();
        assert!(matches!(
            gaussian_dw_rate(-1.0, &p, 1.0),
            Err(Error::InvalidParameter { name: "vm", .. })
        ));
        assert!(matches!(
            gaussian_dw_rate(1.0, &p, 0.0),
            Err(Error::InvalidParameter { name: "beta", .. })
        ));
        assert!(matches!(
            gaussian_dw_rate(1.0, &p, 1.2),
            Err(Error::InvalidParameter { name: "beta", .. })
        ));
    }

    #[test]
    fn epsilon_g_report_is_internally_consistent() {
        let axis = random_walk_1d(2).unwrap();
        let c = qam_product(&axis, 1.0, AxisShape::RandomWalk).unwrap();
        let p = ChannelParams::new(0.5, 0.1).unwrap();
        let r = epsilon_g_bound(&c, &p, &EpsilonGOptions::default()).unwrap();
        assert_abs_diff_eq!(r.snr, 0.5 / 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            r.delta_vn_in,
            delta_vn_constellation(&c).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            r.epsilon_g_upper,
            r.delta_vn_out - r.capacity_gap,
            epsilon = 1e-15
        );
        assert!(r.delta_vn_out >= 0.0);
        assert!(r.capacity_gap >= 0.0);
        assert!(r.n_max > 0);
        assert!(r.mi_converged);
    }

    #[test]
    fn lossless_epsilon_matches_input_delta() {
        // tau = 1, nbar = 0 leaves the constellation untouched, so the output
        // delta (Fock route) must agree with the input delta (Gram route).
        let axis = gauss_hermite_1d(3).unwrap();
        let c = qam_product(&axis, 1.5, AxisShape::GaussHermite).unwrap();
        let p = ChannelParams::new(1.0, 0.0).unwrap();
        let r = epsilon_g_bound(&c, &p, &EpsilonGOptions::default()).unwrap();
        assert_abs_diff_eq!(r.delta_vn_out, r.delta_vn_in, epsilon = 1e-6);
    }

    #[test]
    fn epsilon_g_requires_product_provenance() {
        let c = Constellation::new(
            vec![Complex64::new(0.8, 0.1), Complex64::new(-0.8, -0.1)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let p = ChannelParams::new(0.5, 0.0).unwrap();
        assert!(matches!(
            epsilon_g_bound(&c, &p, &EpsilonGOptions::default()),
            Err(Error::NonProductConstellation)
        ));
    }

    #[test]
    fn delta_functional_vanishes_for_both_channels() {
        let axis = gauss_hermite_1d(4).unwrap();
        let c = qam_product(&axis, 2.5, AxisShape::GaussHermite).unwrap();
        let loss = ChannelSpec::ThermalLoss(ChannelParams::new(0.5, 0.2).unwrap());
        let d = delta_functional(&c, &loss, 1e-10).unwrap();
        assert!(d.value.abs() <= 1e-6, "thermal loss Delta = {}", d.value);
        assert!(!d.flagged);
        assert!(d.excluded_mass < 1e-6);
        for delta in [0.15, f64::INFINITY] {
            let deph =
                ChannelSpec::PhaseDiffusion(PhaseDiffusionParams::new(delta).unwrap());
            let d = delta_functional(&c, &deph, 1e-10).unwrap();
            assert!(
                d.value.abs() <= 1e-6,
                "dephasing Delta = {} at delta = {delta}",
                d.value
            );
        }
    }

    #[test]
    fn delta_functional_rejects_anisotropic_input() {
        let c = Constellation::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let loss = ChannelSpec::ThermalLoss(ChannelParams::new(0.5, 0.0).unwrap());
        assert!(matches!(
            delta_functional(&c, &loss, 1e-10),
            Err(Error::AnisotropicConstellation)
        ));
    }
}
