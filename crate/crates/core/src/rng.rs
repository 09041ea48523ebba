//! Counter-based, splittable randomness.
//!
//! Every path gets its own ChaCha key derived from `(master seed, path
//! index)`; independent draws inside a path use separate ChaCha streams, so
//! the Brownian sequence does not depend on how many jump atoms exist and
//! no result depends on which worker ran the path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

/// Stream tags within one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Message,
    Brownian,
    /// Jump counts for one atom.
    Jumps(usize),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Message => 0,
            Stream::Brownian => 1,
            Stream::Jumps(j) => 2 + j as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for path `path` under master seed `master`.
pub fn derive_seed(master: u64, path: u64) -> u64 {
    splitmix64(splitmix64(master) ^ path.wrapping_mul(0xd605_bbb5_8c8a_bbed))
}

/// Generator for one stream of one path.
pub fn stream_rng(path_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = path_seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream.id());
    rng
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Poisson draw; inversion for small means, `rand_distr` otherwise.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < 30.0 {
        let u: f64 = rng.random();
        let mut k = 0u32;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf && k < 10_000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p == 0.0 {
                break;
            }
        }
        k
    } else {
        Poisson::new(mean).map(|d| d.sample(rng) as u32).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream_rng(42, Stream::Brownian);
        let mut b = stream_rng(42, Stream::Brownian);
        let mut c = stream_rng(42, Stream::Jumps(0));
        let xa: Vec<u64> = (0..8).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.random()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.random()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn poisson_moments() {
        let mut rng = stream_rng(1, Stream::Jumps(0));
        for &mean in &[0.05, 0.5, 3.0, 45.0] {
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| poisson(&mut rng, mean) as f64).collect();
            let m = draws.iter().sum::<f64>() / n as f64;
            let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se, "mean {mean}: {m}");
            assert!((v / mean - 1.0).abs() < 0.05, "var {mean}: {v}");
        }
        assert_eq!(poisson(&mut rng, 0.0), 0);
    }
}
