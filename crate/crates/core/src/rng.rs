//! The single source of randomness.
//!
//! Every stochastic routine takes an explicit `u64` seed and draws from
//! [`Prng`], which is PCG64 (`pcg_xsl_rr_128_64`, 128-bit LCG state with
//! XSL-RR output) as implemented by `rand_pcg::Pcg64`. Seeds are expanded with
//! `SeedableRng::seed_from_u64`, so identical seeds give bit-identical streams
//! on every platform.

use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::Scalar;

pub type Prng = rand_pcg::Pcg64;

pub fn seeded(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Derive an independent stream for sub-task `index` of a seeded job.
pub fn substream(seed: u64, index: u64) -> Prng {
    // splitmix64 finalizer decorrelates neighbouring indices
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    seeded(z ^ (z >> 31))
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform<T: Scalar>(rng: &mut Prng, lo: T, hi: T) -> T {
    let u: f64 = rng.random();
    lo + (hi - lo) * T::of(u)
}

pub fn normal<T: Scalar>(rng: &mut Prng) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::of(z)
}

/// Uniform point in the closed Euclidean ball of radius `radius` in ℝᵈ.
pub fn in_ball<T: Scalar>(rng: &mut Prng, dim: usize, radius: T) -> Vec<T> {
    if dim == 0 {
        return Vec::new();
    }
    let mut dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        dir[0] = 1.0;
    } else {
        dir.iter_mut().for_each(|v| *v /= norm);
    }
    let u: f64 = rng.random();
    let r = u.powf(1.0 / dim as f64);
    dir.into_iter().map(|v| radius * T::of(v * r)).collect()
}
