//! Seeded random instances for the property sweeps and the benchmark.
//!
//! Every instance draws from its own ChaCha8 stream keyed by `(seed, index)`,
//! so sweeps give the same instances whatever order or thread runs them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::Polynomial;

/// Half-width of the exclusion band around b = √3 on the a = 0 line.
pub const SQRT3_BAND: f64 = 1e-6;

pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point in the closed unit disk.
pub fn unit_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let radius = rng.gen::<f64>().sqrt();
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(radius, angle)
}

/// Uniform point in the square `[-half, half]^2`.
pub fn in_box<R: Rng + ?Sized>(rng: &mut R, half: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half))
}

/// Monic cubic whose lower coefficients are uniform in the unit disk times
/// `10^k`, with `k` uniform in `[-3, 3]`.
pub fn random_scaled_cubic<R: Rng + ?Sized>(rng: &mut R) -> Polynomial {
    let scale = 10f64.powf(rng.gen_range(-3.0..=3.0));
    let mut coeffs: Vec<Complex64> = (0..3).map(|_| unit_disk(rng) * scale).collect();
    coeffs.push(Complex64::new(1.0, 0.0));
    Polynomial::new(coeffs).expect("monic")
}

pub fn min_separation(roots: &[Complex64; 3]) -> f64 {
    let [a, b, c] = *roots;
    (a - b).norm().min((b - c).norm()).min((a - c).norm())
}

/// Three roots uniform in the disk of `radius`, pairwise at least `min_sep` apart.
pub fn random_roots<R: Rng + ?Sized>(rng: &mut R, radius: f64, min_sep: f64) -> [Complex64; 3] {
    loop {
        let roots = [(); 3].map(|_| unit_disk(rng) * radius);
        if min_separation(&roots) > min_sep {
            return roots;
        }
    }
}

/// Canonical parameters `(a, b)` with `a` in `[0, amax]` and `b` in `(0, bmax]`.
/// A third of the draws sit on the `a = 0` line, which the theorems treat
/// separately; on that line the band `|b - √3| < SQRT3_BAND` (repeated
/// critical points at b = √3) is redrawn.
pub fn canonical_parameters<R: Rng + ?Sized>(rng: &mut R, amax: f64, bmax: f64) -> (f64, f64) {
    loop {
        let a = if rng.gen_range(0..3) == 0 {
            0.0
        } else {
            rng.gen_range(0.0..=amax)
        };
        let b = bmax * (1.0 - rng.gen::<f64>());
        if a == 0.0 && (b - 3f64.sqrt()).abs() < SQRT3_BAND {
            continue;
        }
        return (a, b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = instance_rng(7, 3).gen();
        let b: f64 = instance_rng(7, 3).gen();
        let c: f64 = instance_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generators_respect_their_bounds() {
        let mut rng = instance_rng(1, 0);
        for _ in 0..1000 {
            assert!(unit_disk(&mut rng).norm() <= 1.0);
            let roots = random_roots(&mut rng, 2.0, 0.1);
            assert!(min_separation(&roots) > 0.1);
            let (a, b) = canonical_parameters(&mut rng, 10.0, 10.0);
            assert!((0.0..=10.0).contains(&a) && b > 0.0 && b <= 10.0);
            assert!(a > 0.0 || (b - 3f64.sqrt()).abs() >= SQRT3_BAND);
            let p = random_scaled_cubic(&mut rng);
            assert_eq!(p.degree(), 3);
            assert_eq!(p.leading(), Complex64::new(1.0, 0.0));
        }
    }
}
