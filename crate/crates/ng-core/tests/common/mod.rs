//! Shared helpers for integration and property tests.

use ng_core::Constellation;
use num_complex::Complex64;
use rand::Rng;

/// Random four-fold-symmetric constellation: orbits `{a, ia, -a, -ia}` with
/// equal weights inside each orbit, rescaled to the requested mean photon
/// number. Four-fold symmetry makes the ensemble isotropic (vanishing mean
/// field and `<a^2>`), which is the class the channel identities assume.
pub fn random_fourfold_constellation<R: Rng>(
    rng: &mut R,
    max_orbits: usize,
    target_vm: f64,
) -> Constellation {
    let orbits = rng.random_range(1..=max_orbits);
    let mut reps = Vec::with_capacity(orbits);
    let mut orbit_probs = Vec::with_capacity(orbits);
    let mut total = 0.0;
    for _ in 0..orbits {
        let radius: f64 = rng.random_range(0.2..1.0);
        let angle: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        reps.push(Complex64::from_polar(radius, angle));
        let w: f64 = rng.random_range(0.2..1.0);
        orbit_probs.push(w);
        total += w;
    }
    let mut second_moment = 0.0;
    for (rep, w) in reps.iter().zip(&orbit_probs) {
        second_moment += (w / total) * rep.norm_sqr();
    }
    let scale = (target_vm / second_moment).sqrt();
    let rot = Complex64::new(0.0, 1.0);
    let mut amplitudes = Vec::with_capacity(4 * orbits);
    let mut probs = Vec::with_capacity(4 * orbits);
    for (rep, w) in reps.iter().zip(&orbit_probs) {
        let mut a = scale * rep;
        for _ in 0..4 {
            amplitudes.push(a);
            probs.push(w / total / 4.0);
            a *= rot;
        }
    }
    Constellation::new(amplitudes, probs).expect("orbit construction is symmetric")
}
