//! Numerics for quantifying the non-Gaussianity of discrete coherent-state
//! constellations and its evolution through bosonic channels.
//!
//! The library measures how far the average state of a discretely modulated
//! coherent-state ensemble is from its Gaussian reference via the entropic gap
//! `delta_vn = S(rho_G) - S(rho)` (the quantum-relative-entropy measure of
//! non-Gaussianity), propagates constellations through thermal-loss and
//! phase-diffusion channels, and connects the quantum picture to the classical
//! shaping gap of the underlying modulation format.
//!
//! Module map:
//!
//! * [`fock`] — truncated Fock-space states (kets, density matrices), coherent
//!   and displaced-thermal constructors, and photon-number tail-based cutoff
//!   selection.
//! * [`constellation`] — 1-D Gauss–Hermite and binomial ("random walk") point
//!   distributions and their QAM product constellations.
//! * [`entropy`] — von Neumann and Gram-matrix entropies, Gaussian moments,
//!   and the non-Gaussianity measure `delta_vn`.
//! * [`channels`] — thermal-loss and phase-diffusion channel actions on both
//!   Fock representations and Gaussian moments.
//! * [`classical`] — mutual information of 1-D constellations over AWGN, the
//!   capacity gap of a product constellation, and MAP decision regions.
//! * [`skr`] — Devetak–Winter rates for Gaussian-modulation CVQKD and the
//!   `epsilon_g` bound tying the secret-key-rate loss of a discrete
//!   constellation to its output non-Gaussianity.
//!
//! Conventions used throughout:
//!
//! * All entropies and information quantities are in **bits** (base-2 logs via
//!   a single shared helper, [`log2`]).
//! * Quadratures are vacuum-normalized: `q = a + a^dag`, `p = i(a^dag - a)`,
//!   so the vacuum covariance is the identity and a thermal state with mean
//!   photon number `nbar` has symplectic eigenvalue `1 + 2 nbar`.
//! * Mean-photon-number modulation variance `V_m = E|alpha|^2` parameterizes
//!   constellations; product constellations then have covariance
//!   `(1 + 2 V_m) I`.

// Parameter guards use `!(x >= 0.0)` so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod classical;
pub mod constellation;
mod eigen;
pub mod entropy;
pub mod fock;
pub mod skr;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two Fock-space objects with different cutoffs were combined.
    #[error("Fock cutoffs differ: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    /// A density matrix was constructed from a non-square array.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// Probabilities must be strictly positive and sum to one.
    #[error("probabilities must be positive and sum to 1 (sum = {sum})")]
    InvalidProbabilities { sum: f64 },

    /// A constellation is not symmetric under negation of its amplitudes.
    #[error("constellation is not symmetric under negation at index {index}")]
    AsymmetricConstellation { index: usize },

    /// A constellation operation requires matching lengths.
    #[error("amplitude and probability lengths differ: {amplitudes} vs {probs}")]
    LengthMismatch { amplitudes: usize, probs: usize },

    /// A 1-D axis exceeds the supported constellation size.
    #[error("axis size {m} exceeds the supported maximum {max}")]
    AxisTooLarge { m: usize, max: usize },

    /// Golub–Welsch weights disagree with the closed-form Hermite weights.
    #[error(
        "quadrature weight cross-check failed at node {index}: \
         |{golub_welsch:e} - {explicit:e}| > {tol:e}"
    )]
    WeightCrossCheck {
        index: usize,
        golub_welsch: f64,
        explicit: f64,
        tol: f64,
    },

    /// A state has an eigenvalue too negative to be numerical noise.
    #[error("state has negative eigenvalue {min_eigenvalue:e}")]
    InvalidState { min_eigenvalue: f64 },

    /// The symplectic eigenvalue fed to the bosonic entropy is below one.
    #[error("bosonic entropy argument {nu} is below 1")]
    SymplecticDomain { nu: f64 },

    /// The Gaussian-minus-state entropy gap came out negative beyond the
    /// numerical floor, indicating inconsistent inputs.
    #[error("non-Gaussianity evaluated to {value:e}, below the consistency floor")]
    NegativeNonGaussianity { value: f64 },

    /// The operation needs per-axis provenance of a product constellation.
    #[error("operation requires a product constellation with per-axis provenance")]
    NonProductConstellation,

    /// The operation needs an isotropic (phase-balanced) constellation.
    #[error("operation requires an isotropic constellation (vanishing mean field and <a^2>)")]
    AnisotropicConstellation,

    /// A signal-to-noise ratio must be nonnegative.
    #[error("signal-to-noise ratio must be nonnegative (got {snr})")]
    InvalidSnr { snr: f64 },

    /// The two-mode covariance matrix for a parameter set is unphysical.
    #[error(
        "covariance for tau = {tau}, nbar = {nbar}, vm = {vm} is unphysical: \
         symplectic eigenvalue {nu} < 1"
    )]
    UnphysicalCovariance { tau: f64, nbar: f64, vm: f64, nu: f64 },

    /// A scalar parameter is outside its domain.
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    /// A decision grid needs at least a 2x2 resolution.
    #[error("grid resolution must be at least 2 (got {resolution})")]
    InvalidResolution { resolution: usize },

    /// The photon-number cutoff search exceeded its hard cap.
    #[error("cutoff search exceeded {cap} photons (tail tolerance {tail_tol:e})")]
    CutoffSearchFailed { cap: usize, tail_tol: f64 },

    /// A serialized constellation could not be parsed.
    #[error("constellation deserialization failed: {reason}")]
    BadConstellationJson { reason: String },
}

/// Library-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// All entropic quantities in this crate are in bits; this is the single
/// shared base-2 logarithm they go through.
#[inline]
pub fn log2(x: f64) -> f64 {
    x.log2()
}

pub use channels::{
    phase_diffusion, phase_diffusion_moments, tau_from_distance, thermal_loss_moments,
    thermal_loss_output, ChannelParams, ChannelSpec, PhaseDiffusionParams, DEFAULT_DB_PER_KM,
};
pub use classical::{awgn_capacity, capacity_gap, map_regions, mi_1d, DecisionGrid, GapEstimate, MiEstimate};
pub use constellation::{
    gauss_hermite_1d, qam_product, random_walk_1d, AxisShape, Constellation, Distribution1D,
    ProductInfo, MAX_AXIS_POINTS,
};
pub use entropy::{
    bosonic_g, constellation_moments, delta_vn, delta_vn_constellation, gaussian_entropy,
    gram_entropy, gram_matrix, moments_from_fock, trace_distance, von_neumann_entropy,
    GaussianMoments, GramMatrix, CLAMP_TOL,
};
pub use fock::{
    choose_cutoff, coherent_ket, density_from_pure_ensemble, displaced_thermal_fock,
    displaced_thermal_pmf, mixture_cutoff, thermal_fock, DensityMatrix, FockKet, DEFAULT_TAIL_TOL,
};
pub use skr::{
    delta_functional, epsilon_g_bound, gaussian_dw_rate, DeltaFunctional, EpsilonGOptions,
    EpsilonGReport,
};
