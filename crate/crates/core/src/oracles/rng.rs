//! Seeded, counter-addressed random streams.
//!
//! A stream is a ChaCha8 keystream keyed by the 64-bit master seed and
//! selected by a 64-bit stream index, so streams with distinct indices are
//! independent and any stream can be regenerated without touching others.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    position: u64,
    limit: Option<u64>,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream {
            seed,
            stream,
            position: 0,
            limit: None,
            inner,
        }
    }

    /// Caps the number of draws; further draws fail with [`Error::RngExhausted`].
    pub fn with_limit(mut self, draws: u64) -> Self {
        self.limit = Some(draws);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of draws taken so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    fn advance(&mut self) -> Result<()> {
        if let Some(limit) = self.limit {
            if self.position >= limit {
                return Err(Error::RngExhausted(self.position));
            }
        }
        self.position = self
            .position
            .checked_add(1)
            .ok_or(Error::RngExhausted(self.position))?;
        Ok(())
    }

    pub fn next_u64(&mut self) -> Result<u64> {
        self.advance()?;
        Ok(self.inner.next_u64())
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> Result<f64> {
        self.advance()?;
        Ok(self.inner.gen::<f64>())
    }

    /// Uniform on `[-half_width, half_width)`.
    pub fn symmetric(&mut self, half_width: f64) -> Result<f64> {
        Ok(half_width * (2.0 * self.unit()? - 1.0))
    }

    /// Uniform index in `0..len`, `len >= 1`.
    pub fn index(&mut self, len: usize) -> Result<usize> {
        debug_assert!(len >= 1);
        self.advance()?;
        Ok(self.inner.gen_range(0..len))
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one stream index.
pub fn derive_stream(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3u64, |acc, &p| mix64(acc ^ mix64(p)))
}

/// FNV-1a over bytes; stable ids for solver labels.
pub fn label_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
