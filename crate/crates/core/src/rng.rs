//! Reproducible random streams.
//!
//! Every random quantity is drawn from ChaCha20 (`rand_chacha::ChaCha20Rng`).
//! The key comes from `seed_from_u64(master)` and the 64-bit stream id selects
//! an independent substream, so `substream(master, i)` is well defined and
//! platform-stable. Replicate `r` of an experiment uses the seed
//! `substream(master, r).next_u64()`; within a design, site `j` draws from
//! `substream(seed, j)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub fn substream(master: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Seed handed to replicate `rep` of an experiment keyed by `master`.
pub fn replicate_seed(master: u64, rep: u64) -> u64 {
    substream(master, rep).next_u64()
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
pub fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by Box-Muller (both variates consumed from two uniforms; one returned).
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = open01(rng);
    let u2 = open01(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
