//! Seeded standard normal draws.
//!
//! Draws come from a ChaCha20 keystream (seed selects the key, `stream`
//! selects the nonce) pushed through a Box-Muller transform evaluated with
//! the pure-Rust `libm` routines, so identical `(seed, stream)` pairs give
//! bit-identical vectors on every platform.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{DenseMatrix, DenseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GaussianSampler {
    pub seed: u64,
    pub stream: u64,
}

impl GaussianSampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A fresh generator positioned at the start of this sampler's stream.
    pub fn generator(&self) -> NormalStream {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        NormalStream { rng, spare: None }
    }

    pub fn vector(&self, n: usize) -> DenseVector {
        let mut g = self.generator();
        DenseVector::from_fn(n, |_, _| g.next_normal())
    }

    /// `rows x cols` matrix filled column-major from the stream.
    pub fn matrix(&self, rows: usize, cols: usize) -> DenseMatrix {
        let mut g = self.generator();
        let data: Vec<f64> = (0..rows * cols).map(|_| g.next_normal()).collect();
        DenseMatrix::from_vec(rows, cols, data)
    }
}

pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    /// Uniform on (0, 1], 53 bits.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * libm::log(u1)).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

/// Mixes a base seed with a replication index and a purpose tag into an
/// independent 64-bit seed (splitmix64 finaliser over the combined words).
pub fn derive_seed(base: u64, index: u64, tag: &str) -> u64 {
    let mut h = splitmix(base ^ 0x9e37_79b9_7f4a_7c15);
    h = splitmix(h ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    for b in tag.bytes() {
        h = splitmix(h ^ u64::from(b));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
