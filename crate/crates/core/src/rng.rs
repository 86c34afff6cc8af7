//! Seeded random streams.
//!
//! Every random quantity is drawn from its own ChaCha8 stream whose seed is
//! derived from the user seed and a role tag (`"support"`, `"values"`,
//! `"rows"`, `"noise"`, ...). Changing one role never perturbs another.
//! Gaussian draws use the Box-Muller transform on pairs of uniforms in
//! `(0, 1]`; both outputs of a pair are used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name recorded in instance manifests.
pub const GENERATOR: &str = "chacha8/splitmix64-tags/box-muller";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Derive the seed of the stream for `tag` from a base seed.
pub fn sub_seed(seed: u64, tag: &str) -> u64 {
    splitmix64(seed ^ fnv1a(tag))
}

pub struct Stream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn tagged(seed: u64, tag: &str) -> Self {
        Self::new(sub_seed(seed, tag))
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Uniform in `(0, 1]`.
    fn open_unit(&mut self) -> f64 {
        1.0 - self.rng.gen::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.open_unit();
        let u2 = self.open_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let a = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * a.sin());
        r * a.cos()
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.standard_normal()).collect()
    }

    /// First `k` entries of a uniformly random permutation of `0..n`
    /// (partial Fisher-Yates).
    pub fn partial_permutation(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in 0..k.min(n) {
            let j = i + self.index(n - i);
            perm.swap(i, j);
        }
        perm.truncate(k.min(n));
        perm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_give_independent_streams() {
        assert_ne!(sub_seed(0, "rows"), sub_seed(0, "noise"));
        assert_eq!(sub_seed(7, "rows"), sub_seed(7, "rows"));
    }

    #[test]
    fn partial_permutation_is_distinct() {
        let mut s = Stream::new(3);
        let mut p = s.partial_permutation(50, 20);
        p.sort_unstable();
        p.dedup();
        assert_eq!(p.len(), 20);
        assert!(p.iter().all(|&i| i < 50));
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut s = Stream::new(11);
        let z = s.normal_vec(200_000);
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }
}
