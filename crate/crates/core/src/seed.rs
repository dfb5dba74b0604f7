//! Seeded random streams.
//!
//! Every random draw comes from a ChaCha8 generator keyed by a 64-bit seed.
//! Symbols, noise and nuisance phases use separate ChaCha streams of the
//! same key, so changing how much noise is drawn never shifts the symbols.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Symbols = 1,
    Noise = 2,
    Phase = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of indices (waveform, SNR point, trial).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Circularly-symmetric complex Gaussian with `E|w|^2 = sigma^2`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let scale = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// Fills `out` with independent `CN(0, sigma^2)` samples added in place.
pub fn add_noise(out: &mut [Complex64], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = stream_rng(seed, Stream::Noise);
    for v in out {
        *v += complex_gaussian(&mut rng, sigma);
    }
}
