//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a 256-bit seed built from the
//! user's 64-bit master seed, a domain tag (waveform, noise, ...), and a
//! sub-key such as a Monte-Carlo trial index. Symbol `l` of a stream uses
//! ChaCha stream id `l`, so symbols can be generated independently and in any
//! order without changing the result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

/// What a stream is used for. Distinct domains never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Waveform = 0x5741_5645,
    Noise = 0x4e4f_4953,
    Trial = 0x5452_4941,
}

pub fn key(seed: u64, domain: Domain, sub: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    k[16..24].copy_from_slice(&sub.to_le_bytes());
    k
}

/// Generator for symbol `symbol` of the stream `(seed, domain, sub)`.
pub fn substream(seed: u64, domain: Domain, sub: u64, symbol: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, domain, sub));
    rng.set_stream(symbol);
    rng
}

/// Derive a child 64-bit seed, e.g. one per Monte-Carlo trial.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    substream(seed, Domain::Trial, index, 0).next_u64()
}

/// Circularly-symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub fn cscg<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(sd * re, sd * im)
}

pub fn cscg_vec<R: rand::Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> Vec<C64> {
    (0..len).map(|_| cscg(rng, variance)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = substream(1, Domain::Noise, 0, 3).next_u64();
        assert_eq!(a, substream(1, Domain::Noise, 0, 3).next_u64());
        assert_ne!(a, substream(1, Domain::Noise, 0, 4).next_u64());
        assert_ne!(a, substream(1, Domain::Waveform, 0, 3).next_u64());
        assert_ne!(a, substream(2, Domain::Noise, 0, 3).next_u64());
        assert_ne!(child_seed(9, 0), child_seed(9, 1));
    }

    #[test]
    fn cscg_moments() {
        let mut rng = substream(5, Domain::Noise, 0, 0);
        let k = 20_000;
        let z = cscg_vec(&mut rng, k, 2.0);
        let p: f64 = z.iter().map(|z| z.norm_sqr()).sum::<f64>() / k as f64;
        let re: f64 = z.iter().map(|z| z.re * z.re).sum::<f64>() / k as f64;
        assert!((p - 2.0).abs() < 0.05 * 2.0);
        assert!((re - 1.0).abs() < 0.05);
    }
}
