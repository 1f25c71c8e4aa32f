//! Discrete constellation geometry: 1-D point distributions and their
//! two-quadrature QAM products.
//!
//! Two families are provided. Gauss–Hermite constellations place the `m`
//! points at the roots of the probabilists' Hermite polynomial `He_m` with the
//! associated Gaussian quadrature weights — the best m-point discretization of
//! a Gaussian in the moment-matching sense. Random-walk constellations place
//! them uniformly at `(2i - m + 1)/sqrt(m-1)` with binomial weights, the
//! distribution of a normalized `(m-1)`-step random walk.
//!
//! Both have zero mean and unit variance; [`qam_product`] scales the product
//! grid so the mean photon number of the complex constellation is a requested
//! `V_m`.

use crate::fock::KahanSum;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest supported 1-D axis size for constellation construction.
pub const MAX_AXIS_POINTS: usize = 64;

/// Internal quadrature (not constellation construction) may use more nodes.
const MAX_QUADRATURE_NODES: usize = 512;

/// Disagreement tolerance between Golub–Welsch weights and the closed-form
/// Hermite weights.
const WEIGHT_CHECK_TOL: f64 = 1e-8;

/// Which 1-D family a constellation axis came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisShape {
    #[serde(rename = "gh")]
    GaussHermite,
    #[serde(rename = "rw")]
    RandomWalk,
}

impl std::fmt::Display for AxisShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxisShape::GaussHermite => write!(f, "gh"),
            AxisShape::RandomWalk => write!(f, "rw"),
        }
    }
}

impl std::str::FromStr for AxisShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gh" => Ok(AxisShape::GaussHermite),
            "rw" => Ok(AxisShape::RandomWalk),
            other => Err(format!("unknown shape {other:?} (expected \"gh\" or \"rw\")")),
        }
    }
}

/// A finite real distribution: ascending points with positive weights.
#[derive(Debug, Clone)]
pub struct Distribution1D {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Distribution1D {
    /// Validates ascending points, positive weights summing to one, and
    /// symmetry about the origin.
    pub fn validate(&self) -> Result<()> {
        let m = self.points.len();
        if m == 0 || self.weights.len() != m {
            return Err(Error::LengthMismatch {
                amplitudes: m,
                probs: self.weights.len(),
            });
        }
        if self.points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter {
                name: "points_ascending",
                value: 0.0,
            });
        }
        let mut sum = KahanSum::default();
        for &w in &self.weights {
            if !(w > 0.0) {
                return Err(Error::InvalidProbabilities { sum: w });
            }
            sum.add(w);
        }
        if (sum.value() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities { sum: sum.value() });
        }
        for i in 0..m {
            let j = m - 1 - i;
            if (self.points[i] + self.points[j]).abs() > 1e-12
                || (self.weights[i] - self.weights[j]).abs() > 1e-12
            {
                return Err(Error::AsymmetricConstellation { index: i });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> f64 {
        let mut acc = KahanSum::default();
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc.add(w * x);
        }
        acc.value()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let mut acc = KahanSum::default();
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc.add(w * (x - mean) * (x - mean));
        }
        acc.value()
    }
}

/// Provenance of a product constellation: the 1-D axis it was built from and
/// the scale applied to reach the requested modulation variance.
#[derive(Debug, Clone)]
pub struct ProductInfo {
    pub shape: AxisShape,
    /// Points per axis; the constellation has `m^2` symbols.
    pub m: usize,
    /// The unscaled 1-D axis distribution.
    pub axis: Distribution1D,
    /// Multiplicative scale from axis coordinates to amplitude quadratures.
    pub scale: f64,
}

/// A discrete coherent-state constellation: complex amplitudes with
/// probabilities, symmetric under negation.
#[derive(Debug, Clone)]
pub struct Constellation {
    amplitudes: Vec<Complex64>,
    probs: Vec<f64>,
    variance: f64,
    product: Option<ProductInfo>,
}

impl Constellation {
    /// Builds and validates a constellation: positive probabilities summing to
    /// one, and for every amplitude `a` with probability `p` a matching `-a`
    /// with the same probability.
    pub fn new(amplitudes: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != probs.len() {
            return Err(Error::LengthMismatch {
                amplitudes: amplitudes.len(),
                probs: probs.len(),
            });
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidProbabilities { sum: 0.0 });
        }
        let mut sum = KahanSum::default();
        for &p in &probs {
            if !(p > 0.0) {
                return Err(Error::InvalidProbabilities { sum: p });
            }
            sum.add(p);
        }
        if (sum.value() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities { sum: sum.value() });
        }
        for (i, (&a, &p)) in amplitudes.iter().zip(&probs).enumerate() {
            let scale = 1.0 + a.norm();
            let mirrored = amplitudes
                .iter()
                .zip(&probs)
                .any(|(&b, &q)| (b + a).norm() <= 1e-12 * scale && (q - p).abs() <= 1e-12);
            if !mirrored {
                return Err(Error::AsymmetricConstellation { index: i });
            }
        }
        Ok(Self::from_parts(amplitudes, probs, None))
    }

    /// Internal constructor for geometry already known to be symmetric.
    fn from_parts(
        amplitudes: Vec<Complex64>,
        probs: Vec<f64>,
        product: Option<ProductInfo>,
    ) -> Self {
        let mut acc = KahanSum::default();
        for (a, p) in amplitudes.iter().zip(&probs) {
            acc.add(p * a.norm_sqr());
        }
        Self {
            amplitudes,
            probs,
            variance: acc.value(),
            product,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mean photon number of the modulation, `V_m = sum_i p_i |a_i|^2`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Product provenance, if the constellation was built by [`qam_product`].
    pub fn product(&self) -> Option<&ProductInfo> {
        self.product.as_ref()
    }

    /// Largest amplitude magnitude (drives Fock cutoffs).
    pub fn max_abs(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }

    /// Mean field `sum_i p_i a_i` (zero for symmetric constellations up to
    /// rounding).
    pub fn mean_field(&self) -> Complex64 {
        let mut re = KahanSum::default();
        let mut im = KahanSum::default();
        for (a, p) in self.amplitudes.iter().zip(&self.probs) {
            re.add(p * a.re);
            im.add(p * a.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// Serializes to the interchange JSON schema.
    pub fn to_json(&self) -> String {
        let dto = ConstellationJson {
            shape: self.product.as_ref().map(|p| p.shape),
            m: self.product.as_ref().map(|p| p.m),
            v_m: self.variance,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
            probs: self.probs.clone(),
        };
        serde_json::to_string_pretty(&dto).expect("constellation serialization cannot fail")
    }

    /// Deserializes from the interchange JSON schema, revalidating the
    /// geometry and rebuilding product provenance when `shape` and `m` are
    /// present.
    pub fn from_json(json: &str) -> Result<Self> {
        let dto: ConstellationJson =
            serde_json::from_str(json).map_err(|e| Error::BadConstellationJson {
                reason: e.to_string(),
            })?;
        let amplitudes: Vec<Complex64> = dto
            .amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let mut c = Constellation::new(amplitudes, dto.probs)?;
        if (c.variance - dto.v_m).abs() > 1e-9 * (1.0 + dto.v_m.abs()) {
            return Err(Error::BadConstellationJson {
                reason: format!(
                    "declared V_m = {} does not match amplitude variance {}",
                    dto.v_m, c.variance
                ),
            });
        }
        if let (Some(shape), Some(m)) = (dto.shape, dto.m) {
            let axis = match shape {
                AxisShape::GaussHermite => gauss_hermite_1d(m)?,
                AxisShape::RandomWalk => random_walk_1d(m)?,
            };
            let axis_var = axis.variance();
            let scale = if axis_var > 0.0 {
                (c.variance / (2.0 * axis_var)).sqrt()
            } else {
                0.0
            };
            c.product = Some(ProductInfo {
                shape,
                m,
                axis,
                scale,
            });
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct ConstellationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<AxisShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(rename = "V_m")]
    v_m: f64,
    amplitudes: Vec<[f64; 2]>,
    probs: Vec<f64>,
}

/// Golub–Welsch nodes and weights for the probabilists' Hermite weight
/// `e^{-x^2/2}/sqrt(2 pi)`: eigenvalues of the symmetric tridiagonal Jacobi
/// matrix with zero diagonal and off-diagonal `sqrt(k)`, with weights from the
/// squared first eigenvector components (`mu_0 = 1`).
fn golub_welsch(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let mut jacobi = Array2::<f64>::zeros((m, m));
    for k in 1..m {
        let beta = (k as f64).sqrt();
        jacobi[[k - 1, k]] = beta;
        jacobi[[k, k - 1]] = beta;
    }
    let (values, first_row) = crate::eigen::eigh_sym_first_row(&jacobi);
    let mut points = values;
    let mut weights: Vec<f64> = first_row.iter().map(|u| u * u).collect();
    // The spectrum is symmetric about zero; enforce the symmetry exactly so
    // downstream constellations are symmetric to the last bit.
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (points[i] - points[j]);
        points[i] = x;
        points[j] = -x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        points[m / 2] = 0.0;
    }
    // Tighten the weight normalization (orthonormality already puts the sum
    // within a few ulps of one).
    let mut sum = KahanSum::default();
    for &w in &weights {
        sum.add(w);
    }
    let total = sum.value();
    for w in &mut weights {
        *w /= total;
    }
    (points, weights)
}

/// Probabilists' Hermite polynomial `He_n(x)` by its three-term recurrence.
fn hermite_he(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gauss–Hermite axis: `m` points at the roots of `He_m` with Gaussian
/// quadrature weights. Weights from Golub–Welsch are cross-checked against
/// the closed form `(m-1)! / (m He_{m-1}(x)^2)`.
pub fn gauss_hermite_1d(m: usize) -> Result<Distribution1D> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
        });
    }
    if m > MAX_AXIS_POINTS {
        return Err(Error::AxisTooLarge {
            m,
            max: MAX_AXIS_POINTS,
        });
    }
    let (points, weights) = golub_welsch(m);
    if m > 1 {
        let mut factorial = 1.0f64;
        for k in 1..m {
            factorial *= k as f64;
        }
        for (i, (&x, &w)) in points.iter().zip(&weights).enumerate() {
            let he = hermite_he(m - 1, x);
            let explicit = factorial / (m as f64 * he * he);
            if (w - explicit).abs() > WEIGHT_CHECK_TOL {
                return Err(Error::WeightCrossCheck {
                    index: i,
                    golub_welsch: w,
                    explicit,
                    tol: WEIGHT_CHECK_TOL,
                });
            }
        }
    }
    let d = Distribution1D { points, weights };
    d.validate()?;
    Ok(d)
}

/// Gauss–Hermite nodes for internal quadrature (not capped at the
/// constellation axis limit, no closed-form cross-check — the factorial in the
/// explicit weight formula overflows beyond ~170 nodes).
pub(crate) fn hermite_nodes(k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 || k > MAX_QUADRATURE_NODES {
        return Err(Error::InvalidParameter {
            name: "quadrature_nodes",
            value: k as f64,
        });
    }
    Ok(golub_welsch(k))
}

/// Random-walk axis: `m` equispaced points `(2i - m + 1)/sqrt(m-1)` with
/// binomial weights `C(m-1, i)/2^{m-1}` — zero mean and exactly unit variance.
pub fn random_walk_1d(m: usize) -> Result<Distribution1D> {
    if m < 2 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m as f64,
        });
    }
    if m > MAX_AXIS_POINTS {
        return Err(Error::AxisTooLarge {
            m,
            max: MAX_AXIS_POINTS,
        });
    }
    let n = m - 1;
    let norm = (n as f64).sqrt();
    let mut points = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    // Binomials are exact in u128 for all supported m.
    let mut binomial: u128 = 1;
    let denom = 2f64.powi(n as i32);
    for i in 0..m {
        points.push((2.0 * i as f64 - n as f64) / norm);
        weights.push(binomial as f64 / denom);
        if i < n {
            binomial = binomial * (n - i) as u128 / (i + 1) as u128;
        }
    }
    let d = Distribution1D { points, weights };
    d.validate()?;
    Ok(d)
}

/// Product (QAM) constellation from a 1-D axis: amplitudes
/// `s (x_j + i x_k)` with probabilities `w_j w_k`, where the scale `s` is
/// chosen so the mean photon number equals `vm`.
///
/// The row-major symbol order is `index = j * m + k` (real axis outer).
/// A degenerate single-point axis at the origin cannot be scaled; the result
/// is then the vacuum "constellation" with variance zero.
pub fn qam_product(axis: &Distribution1D, vm: f64, shape: AxisShape) -> Result<Constellation> {
    axis.validate()?;
    if !(vm >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "vm",
            value: vm,
        });
    }
    let m = axis.len();
    if m > MAX_AXIS_POINTS {
        return Err(Error::AxisTooLarge {
            m,
            max: MAX_AXIS_POINTS,
        });
    }
    let axis_var = axis.variance();
    let scale = if axis_var > 0.0 {
        (vm / (2.0 * axis_var)).sqrt()
    } else {
        0.0
    };
    let mut amplitudes = Vec::with_capacity(m * m);
    let mut probs = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            amplitudes.push(Complex64::new(
                scale * axis.points[j],
                scale * axis.points[k],
            ));
            probs.push(axis.weights[j] * axis.weights[k]);
        }
    }
    let info = ProductInfo {
        shape,
        m,
        axis: axis.clone(),
        scale,
    };
    Ok(Constellation::from_parts(amplitudes, probs, Some(info)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_hermite_two_and_three_points_are_exact() {
        let d2 = gauss_hermite_1d(2).unwrap();
        assert_abs_diff_eq!(d2.points[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d2.points[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d2.weights[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d2.weights[1], 0.5, epsilon = 1e-14);

        let d3 = gauss_hermite_1d(3).unwrap();
        let r3 = 3f64.sqrt();
        assert_abs_diff_eq!(d3.points[0], -r3, epsilon = 1e-13);
        assert_eq!(d3.points[1], 0.0);
        assert_abs_diff_eq!(d3.points[2], r3, epsilon = 1e-13);
        assert_abs_diff_eq!(d3.weights[0], 1.0 / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(d3.weights[1], 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn gauss_hermite_five_points_match_radical_closed_form() {
        // He_5 roots: 0, +-sqrt(5 -+ sqrt(10)); weights 8/15 and
        // (7 +- 2 sqrt(10))/60 (larger weight on the inner pair).
        let d = gauss_hermite_1d(5).unwrap();
        let r10 = 10f64.sqrt();
        let inner = (5.0 - r10).sqrt();
        let outer = (5.0 + r10).sqrt();
        let expected_points = [-outer, -inner, 0.0, inner, outer];
        let w_outer = (7.0 - 2.0 * r10) / 60.0;
        let w_inner = (7.0 + 2.0 * r10) / 60.0;
        let expected_weights = [w_outer, w_inner, 8.0 / 15.0, w_inner, w_outer];
        for i in 0..5 {
            assert_abs_diff_eq!(d.points[i], expected_points[i], epsilon = 1e-12);
            assert_abs_diff_eq!(d.weights[i], expected_weights[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_hermite_axis_is_standardized() {
        for m in [1, 2, 3, 4, 7, 16, 33, 64] {
            let d = gauss_hermite_1d(m).unwrap();
            assert_eq!(d.len(), m);
            d.validate().unwrap();
            assert_abs_diff_eq!(d.mean(), 0.0, epsilon = 1e-13);
            if m > 1 {
                assert_abs_diff_eq!(d.variance(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn gauss_hermite_caps_axis_size() {
        assert!(matches!(
            gauss_hermite_1d(65),
            Err(Error::AxisTooLarge { .. })
        ));
        assert!(gauss_hermite_1d(0).is_err());
    }

    #[test]
    fn quadrature_nodes_integrate_gaussian_moments() {
        let (points, weights) = hermite_nodes(96).unwrap();
        assert_eq!(points.len(), 96);
        let m2: f64 = points.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
        let m4: f64 = points
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(4))
            .sum();
        assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-9);
        assert!(hermite_nodes(513).is_err());
    }

    #[test]
    fn random_walk_small_cases_are_exact() {
        let d3 = random_walk_1d(3).unwrap();
        let r2 = 2f64.sqrt();
        assert_abs_diff_eq!(d3.points[0], -r2, epsilon = 1e-15);
        assert_eq!(d3.points[1], 0.0);
        assert_abs_diff_eq!(d3.points[2], r2, epsilon = 1e-15);
        assert_eq!(d3.weights, vec![0.25, 0.5, 0.25]);

        let d5 = random_walk_1d(5).unwrap();
        assert_eq!(
            d5.points,
            vec![-2.0, -1.0, 0.0, 1.0, 2.0]
        );
        assert_eq!(
            d5.weights,
            vec![1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0]
        );
        assert_abs_diff_eq!(d5.variance(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn random_walk_is_standardized_up_to_the_cap() {
        for m in [2, 3, 8, 17, 50, 64] {
            let d = random_walk_1d(m).unwrap();
            d.validate().unwrap();
            assert_abs_diff_eq!(d.mean(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.variance(), 1.0, epsilon = 1e-12);
        }
        assert!(random_walk_1d(1).is_err());
        assert!(matches!(
            random_walk_1d(65),
            Err(Error::AxisTooLarge { .. })
        ));
    }

    #[test]
    fn qam_product_hits_requested_variance() {
        for (m, vm) in [(2usize, 1.0), (4, 2.5), (8, 0.7), (16, 5.0)] {
            let axis = gauss_hermite_1d(m).unwrap();
            let c = qam_product(&axis, vm, AxisShape::GaussHermite).unwrap();
            assert_eq!(c.len(), m * m);
            assert_abs_diff_eq!(c.variance(), vm, epsilon = 1e-12 * (1.0 + vm));
            let mean = c.mean_field();
            assert!(mean.norm() < 1e-14);
            // Second complex moment vanishes for products.
            let m2: Complex64 = c
                .amplitudes()
                .iter()
                .zip(c.probs())
                .map(|(a, &p)| p * a * a)
                .sum();
            assert!(m2.norm() < 1e-13 * (1.0 + vm));
            let info = c.product().unwrap();
            assert_eq!(info.m, m);
            assert_eq!(info.shape, AxisShape::GaussHermite);
        }
    }

    #[test]
    fn qpsk_from_random_walk_axis() {
        let axis = random_walk_1d(2).unwrap();
        let c = qam_product(&axis, 1.0, AxisShape::RandomWalk).unwrap();
        let s = 0.5f64.sqrt();
        let expected = [
            Complex64::new(-s, -s),
            Complex64::new(-s, s),
            Complex64::new(s, -s),
            Complex64::new(s, s),
        ];
        for (a, e) in c.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-15);
        }
        assert!(c.probs().iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert_abs_diff_eq!(c.variance(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_single_point_product_is_vacuum() {
        let axis = gauss_hermite_1d(1).unwrap();
        let c = qam_product(&axis, 2.5, AxisShape::GaussHermite).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.amplitudes()[0], Complex64::new(0.0, 0.0));
        assert_eq!(c.variance(), 0.0);
    }

    #[test]
    fn constellation_validation_rejects_asymmetry() {
        // Lone positive point: no mirror.
        let r = Constellation::new(vec![Complex64::new(1.0, 0.0)], vec![1.0]);
        assert!(matches!(r, Err(Error::AsymmetricConstellation { .. })));
        // Mirrored points with unequal probabilities.
        let r = Constellation::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            vec![0.7, 0.3],
        );
        assert!(matches!(r, Err(Error::AsymmetricConstellation { .. })));
        // Valid BPSK-like pair passes.
        let c = Constellation::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_abs_diff_eq!(c.variance(), 1.0, epsilon = 1e-15);
        // A single point at the origin is its own mirror.
        let c = Constellation::new(vec![Complex64::new(0.0, 0.0)], vec![1.0]).unwrap();
        assert_eq!(c.variance(), 0.0);
    }

    #[test]
    fn constellation_rejects_bad_probabilities() {
        let amps = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(Constellation::new(amps.clone(), vec![0.5, 0.6]).is_err());
        assert!(Constellation::new(amps.clone(), vec![1.0, 0.0]).is_err());
        assert!(Constellation::new(amps, vec![0.5]).is_err());
    }

    #[test]
    fn json_round_trip_preserves_product_constellations() {
        let axis = gauss_hermite_1d(4).unwrap();
        let c = qam_product(&axis, 2.5, AxisShape::GaussHermite).unwrap();
        let json = c.to_json();
        assert!(json.contains("\"shape\": \"gh\""));
        assert!(json.contains("\"V_m\""));
        let back = Constellation::from_json(&json).unwrap();
        assert_eq!(back.len(), c.len());
        assert_abs_diff_eq!(back.variance(), c.variance(), epsilon = 1e-12);
        for (a, b) in c.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        let info = back.product().unwrap();
        assert_eq!(info.shape, AxisShape::GaussHermite);
        assert_eq!(info.m, 4);
        assert_abs_diff_eq!(
            info.scale,
            c.product().unwrap().scale,
            epsilon = 1e-14
        );
    }

    #[test]
    fn json_round_trip_for_custom_constellation() {
        let c = Constellation::new(
            vec![
                Complex64::new(0.9, 0.1),
                Complex64::new(-0.9, -0.1),
                Complex64::new(-0.2, 1.1),
                Complex64::new(0.2, -1.1),
            ],
            vec![0.3, 0.3, 0.2, 0.2],
        )
        .unwrap();
        let back = Constellation::from_json(&c.to_json()).unwrap();
        assert!(back.product().is_none());
        assert_abs_diff_eq!(back.variance(), c.variance(), epsilon = 1e-12);
    }

    #[test]
    fn json_rejects_inconsistent_variance() {
        let json = r#"{
            "V_m": 3.0,
            "amplitudes": [[1.0, 0.0], [-1.0, 0.0]],
            "probs": [0.5, 0.5]
        }"#;
        assert!(matches!(
            Constellation::from_json(json),
            Err(Error::BadConstellationJson { .. })
        ));
        assert!(Constellation::from_json("not json").is_err());
    }
}
