//! Classical information quantities of the modulation format over AWGN, and
//! MAP decision regions.
//!
//! The capacity gap `D` of a product constellation measures how many bits the
//! discrete format loses against the Gaussian-input capacity of the complex
//! AWGN channel at the same SNR:
//! `D = log2(1 + snr) - 2 I_axis(snr)`, where `I_axis` is the mutual
//! information of one quadrature axis over a real unit-noise AWGN channel
//! with the axis scaled to power `snr`. Entropy integrals are evaluated by
//! Gauss–Hermite quadrature per mixture component with a log-sum-exp mixture
//! density, and convergence is checked by doubling the node count.

use crate::constellation::{hermite_nodes, Constellation, Distribution1D};
use crate::fock::KahanSum;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Convergence tolerance for the K-vs-2K quadrature comparison.
const MI_CONV_TOL: f64 = 1e-7;

/// Mutual information estimate with its internal convergence evidence.
#[derive(Debug, Clone, Copy)]
pub struct MiEstimate {
    /// Best estimate in bits (the fine-grid value, clamped at zero).
    pub bits: f64,
    /// Estimate with the requested node count.
    pub coarse: f64,
    /// Estimate with twice the node count.
    pub fine: f64,
    /// Whether coarse and fine agree to 1e-7 bits.
    pub converged: bool,
}

fn entropy_of_output_bits(x: &[f64], weights: &[f64], nodes: usize) -> Result<f64> {
    let (z, v) = hermite_nodes(nodes)?;
    let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut outer = KahanSum::default();
    for (i, &wi) in weights.iter().enumerate() {
        let mut inner = KahanSum::default();
        for (&zk, &vk) in z.iter().zip(&v) {
            let y = x[i] + zk;
            // ln f(y) via log-sum-exp over the mixture components.
            let mut best = f64::NEG_INFINITY;
            for (j, &lw) in ln_w.iter().enumerate() {
                let t = lw - 0.5 * (y - x[j]) * (y - x[j]);
                if t > best {
                    best = t;
                }
            }
            let mut acc = 0.0;
            for (j, &lw) in ln_w.iter().enumerate() {
                acc += (lw - 0.5 * (y - x[j]) * (y - x[j]) - best).exp();
            }
            let ln_f = best + acc.ln() - half_ln_2pi;
            inner.add(vk * ln_f);
        }
        outer.add(wi * inner.value());
    }
    // h(Y) in bits.
    Ok(-outer.value() / std::f64::consts::LN_2)
}

/// Mutual information in bits of a 1-D constellation over a real AWGN channel
/// with unit noise, the constellation rescaled so its power is `snr`.
///
/// Computed as `I = h(Y) - (1/2) log2(2 pi e)` with `h(Y)` by `nodes`-point
/// Gauss–Hermite quadrature per component; the returned estimate doubles the
/// node count and reports whether the two grids agree.
pub fn mi_1d(d: &Distribution1D, snr: f64, nodes: usize) -> Result<MiEstimate> {
    d.validate()?;
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(Error::InvalidSnr { snr });
    }
    if d.len() == 1 {
        return Ok(MiEstimate {
            bits: 0.0,
            coarse: 0.0,
            fine: 0.0,
            converged: true,
        });
    }
    let sd = d.variance().sqrt();
    let gain = snr.sqrt() / sd;
    let x: Vec<f64> = d.points.iter().map(|p| gain * p).collect();
    let half_log2_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
    let coarse = entropy_of_output_bits(&x, &d.weights, nodes)? - half_log2_2pie;
    let fine = entropy_of_output_bits(&x, &d.weights, 2 * nodes)? - half_log2_2pie;
    Ok(MiEstimate {
        bits: fine.max(0.0),
        coarse,
        fine,
        converged: (coarse - fine).abs() <= MI_CONV_TOL,
    })
}

/// Gaussian-input AWGN capacity in bits: `log2(1 + snr)` for the complex
/// channel, `(1/2) log2(1 + snr)` for the real channel.
pub fn awgn_capacity(snr: f64, complex_channel: bool) -> Result<f64> {
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(Error::InvalidSnr { snr });
    }
    let real = 0.5 * (1.0 + snr).log2();
    Ok(if complex_channel { 2.0 * real } else { real })
}

/// Capacity gap of a product constellation with its per-axis MI evidence.
#[derive(Debug, Clone, Copy)]
pub struct GapEstimate {
    /// `log2(1 + snr) - 2 I_axis`, clamped at zero.
    pub bits: f64,
    /// The per-axis mutual information estimate behind the gap.
    pub axis_mi: MiEstimate,
}

/// Capacity gap `D` of a product constellation at the given complex-channel
/// SNR. Requires product provenance: the gap decomposes over the two
/// quadrature axes only for product constellations.
pub fn capacity_gap(c: &Constellation, snr: f64, nodes: usize) -> Result<GapEstimate> {
    let info = c.product().ok_or(Error::NonProductConstellation)?;
    let axis_mi = mi_1d(&info.axis, snr, nodes)?;
    let capacity = awgn_capacity(snr, true)?;
    let bits = (capacity - 2.0 * axis_mi.fine).max(0.0);
    Ok(GapEstimate { bits, axis_mi })
}

/// MAP decision regions of a constellation on a square grid.
#[derive(Debug, Clone)]
pub struct DecisionGrid {
    /// Grid spans `[-extent, extent]` in both quadratures.
    pub extent: f64,
    /// Points per side.
    pub resolution: usize,
    /// `labels[[iy, ix]]` = index of the MAP symbol at
    /// `(coordinate(ix), coordinate(iy))`.
    pub labels: Array2<u32>,
}

impl DecisionGrid {
    /// Coordinate of grid index `i` along either axis (ascending, symmetric
    /// about zero).
    pub fn coordinate(&self, i: usize) -> f64 {
        grid_coordinate(self.extent, self.resolution, i)
    }
}

// Signed integer numerator keeps the grid exactly mirror-symmetric:
// coordinate(res - 1 - i) is the bitwise negation of coordinate(i).
fn grid_coordinate(extent: f64, resolution: usize, i: usize) -> f64 {
    let half = (resolution - 1) as f64;
    extent * (2.0 * i as f64 - half) / half
}

/// Maximum-a-posteriori symbol regions over complex AWGN with noise variance
/// `noise_var` (per complex sample): each cell gets
/// `argmax_i p_i exp(-|y - a_i|^2 / noise_var)`, ties resolved toward the
/// lowest symbol index.
pub fn map_regions(
    c: &Constellation,
    noise_var: f64,
    extent: f64,
    resolution: usize,
) -> Result<DecisionGrid> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::InvalidParameter {
            name: "noise_var",
            value: noise_var,
        });
    }
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::InvalidParameter {
            name: "extent",
            value: extent,
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidResolution { resolution });
    }
    // Prior bias referenced to the largest prior: the argmax is unchanged,
    // and equal priors contribute an exact zero, so the uniform case reduces
    // bit-for-bit to a nearest-neighbor comparison.
    let p_max = c.probs().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scores_bias: Vec<f64> = c
        .probs()
        .iter()
        .map(|p| noise_var * (p.ln() - p_max.ln()))
        .collect();
    let amplitudes = c.amplitudes();
    let mut labels = Array2::<u32>::zeros((resolution, resolution));
    for iy in 0..resolution {
        let y = grid_coordinate(extent, resolution, iy);
        for ix in 0..resolution {
            let x = grid_coordinate(extent, resolution, ix);
            let point = Complex64::new(x, y);
            let mut best = f64::NEG_INFINITY;
            let mut best_idx = 0u32;
            for (i, (&a, &bias)) in amplitudes.iter().zip(&scores_bias).enumerate() {
                let score = bias - (point - a).norm_sqr();
                if score > best {
                    best = score;
                    best_idx = i as u32;
                }
            }
            labels[[iy, ix]] = best_idx;
        }
    }
    Ok(DecisionGrid {
        extent,
        resolution,
        labels,
    })
}
