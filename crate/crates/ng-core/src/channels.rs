//! Bosonic channel actions on constellations and Fock states.
//!
//! Two channels are modeled:
//!
//! * **Thermal loss** with transmittance `tau` and environment occupation
//!   `nbar`: a Gaussian channel. Coherent inputs map to displaced thermal
//!   states, so the action on a constellation is assembled exactly from
//!   displaced-thermal components; on moments it contracts the mean by
//!   `sqrt(tau)` and mixes the covariance toward `(2 nbar + 1) I`.
//! * **Phase diffusion** with spread `delta`: a non-Gaussian dephasing that
//!   multiplies Fock matrix elements by `exp(-delta^2 (n - m)^2)`, leaving the
//!   photon-number diagonal untouched. `delta = +inf` is the fully dephased
//!   limit. The equivalent Kraus ladder uses `lambda = sqrt(2) delta`
//!   (summing `P_k rho P_k` over the dephasing Kraus set reproduces the
//!   entrywise factor exactly; see the oracle test).

use crate::constellation::Constellation;
use crate::entropy::{constellation_moments, moments_from_expectations, GaussianMoments};
use crate::fock::{displaced_thermal_accumulate, log_factorial_table, DensityMatrix, KahanSum};
use crate::{Error, Result};
use num_complex::Complex64;

/// Default fiber attenuation used by the distance-to-transmittance helper.
/// The dB/km figure is applied to the *amplitude*, so the default 0.2 dB/km
/// reproduces the power transmittance `tau = 10^{-0.01 d}`.
pub const DEFAULT_DB_PER_KM: f64 = 0.2;

/// Thermal-loss channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    tau: f64,
    nbar: f64,
}

impl ChannelParams {
    /// Requires `0 < tau <= 1` and `nbar >= 0`.
    pub fn new(tau: f64, nbar: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
            });
        }
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::InvalidParameter {
                name: "nbar",
                value: nbar,
            });
        }
        Ok(Self { tau, nbar })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Excess noise `xi = 2 nbar (1 - tau)` referred to the channel output.
    pub fn excess_noise(&self) -> f64 {
        2.0 * self.nbar * (1.0 - self.tau)
    }

    /// Environment variance `epsilon = 2 nbar + 1`.
    pub fn epsilon(&self) -> f64 {
        2.0 * self.nbar + 1.0
    }
}

/// Phase-diffusion channel parameter (`delta >= 0`, `+inf` allowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiffusionParams {
    delta: f64,
}

impl PhaseDiffusionParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// One of the two supported channels, for interfaces generic over both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    ThermalLoss(ChannelParams),
    PhaseDiffusion(PhaseDiffusionParams),
}

/// Power transmittance after `d_km` kilometers at `db_per_km` amplitude
/// attenuation: `tau = 10^{-(db_per_km/20) d_km}`. The default
/// [`DEFAULT_DB_PER_KM`] gives `tau = 10^{-0.01 d}`.
pub fn tau_from_distance(d_km: f64, db_per_km: f64) -> Result<f64> {
    if !(d_km >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "d_km",
            value: d_km,
        });
    }
    if !(db_per_km > 0.0) {
        return Err(Error::InvalidParameter {
            name: "db_per_km",
            value: db_per_km,
        });
    }
    Ok(10f64.powf(-db_per_km / 20.0 * d_km))
}

/// Moment map of thermal loss applied to a constellation's average state:
/// mean scales by `sqrt(tau)`, covariance becomes
/// `tau Gamma + (1 - tau)(2 nbar + 1) I`.
pub fn thermal_loss_moments(c: &Constellation, p: &ChannelParams) -> GaussianMoments {
    let m = constellation_moments(c);
    let st = p.tau.sqrt();
    let add = (1.0 - p.tau) * p.epsilon();
    GaussianMoments {
        mean: [st * m.mean[0], st * m.mean[1]],
        cov: [
            [p.tau * m.cov[0][0] + add, p.tau * m.cov[0][1]],
            [p.tau * m.cov[1][0], p.tau * m.cov[1][1] + add],
        ],
    }
}

/// Output state of the thermal-loss channel on a constellation, truncated at
/// `n_max`: the exact mixture
/// `sum_i p_i D(sqrt(tau) a_i) rho_th(nbar (1 - tau)) D^dag`.
pub fn thermal_loss_output(
    c: &Constellation,
    p: &ChannelParams,
    n_max: usize,
) -> Result<DensityMatrix> {
    if c.is_empty() {
        return Err(Error::InvalidProbabilities { sum: 0.0 });
    }
    let st = p.tau.sqrt();
    let nth = p.nbar * (1.0 - p.tau);
    let log_fact = log_factorial_table(n_max);
    let mut out = DensityMatrix::zeros(n_max);
    for (&alpha, &prob) in c.amplitudes().iter().zip(c.probs()) {
        displaced_thermal_accumulate(&mut out, prob, st * alpha, nth, &log_fact);
    }
    out.hermitize();
    Ok(out)
}

/// Phase diffusion on a Fock-basis density matrix: multiplies entry `(n, m)`
/// by `exp(-delta^2 (n - m)^2)`; the diagonal is untouched (exact trace
/// preservation). `delta = +inf` zeroes all off-diagonal entries.
pub fn phase_diffusion(rho: &DensityMatrix, p: &PhaseDiffusionParams) -> DensityMatrix {
    let mut out = rho.clone();
    let dim = out.dim();
    let d2 = p.delta * p.delta;
    for n in 0..dim {
        for m in 0..dim {
            if n == m {
                continue;
            }
            let k = n as f64 - m as f64;
            // For delta = +inf the factor is exactly zero (k != 0 here).
            out.entries[[n, m]] *= (-d2 * k * k).exp();
        }
    }
    out
}

/// Moment map of phase diffusion on a constellation's average state:
/// `<a>` scales by `e^{-delta^2}`, `<a^2>` by `e^{-4 delta^2}`, and the
/// photon number (hence the diagonal) is unchanged. For symmetric
/// constellations these moments coincide with the input moments.
pub fn phase_diffusion_moments(
    c: &Constellation,
    p: &PhaseDiffusionParams,
) -> GaussianMoments {
    let mut a_re = KahanSum::default();
    let mut a_im = KahanSum::default();
    let mut a2_re = KahanSum::default();
    let mut a2_im = KahanSum::default();
    for (alpha, &prob) in c.amplitudes().iter().zip(c.probs()) {
        a_re.add(prob * alpha.re);
        a_im.add(prob * alpha.im);
        let sq = alpha * alpha;
        a2_re.add(prob * sq.re);
        a2_im.add(prob * sq.im);
    }
    let d2 = p.delta * p.delta;
    let a = Complex64::new(a_re.value(), a_im.value()) * (-d2).exp();
    let a2 = Complex64::new(a2_re.value(), a2_im.value()) * (-4.0 * d2).exp();
    moments_from_expectations(a, a2, c.variance())
}
