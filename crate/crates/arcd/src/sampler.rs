//! Seeded randomness: coordinate sampling and stream splitting.
//!
//! A run owns two independent streams derived from one user seed — one for
//! coordinate draws, one for data-sample draws — so changing the problem
//! dimension never perturbs the sample order and vice versa.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stream tags mixed into the user seed to derive independent sub-streams.
const COORD_STREAM: u64 = 0x636f_6f72_6449_6478; // "coordIdx"
const DATA_STREAM: u64 = 0x6461_7461_5374_726d; // "dataStrm"

/// splitmix64 finalizer; decorrelates tagged seeds.
fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn coordinate_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, COORD_STREAM))
}

pub fn data_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, DATA_STREAM))
}

/// Uniform sampler over coordinate indices `0..n`.
///
/// Each draw is independent and uniform; identical seeds give identical
/// draw sequences within one build.
#[derive(Debug, Clone)]
pub struct CoordinateSampler {
    n: usize,
    rng_seed: u64,
    rng: ChaCha8Rng,
    draw_count: u64,
}

impl CoordinateSampler {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("coordinate sampler requires n >= 1"));
        }
        Ok(CoordinateSampler {
            n,
            rng_seed: seed,
            rng: coordinate_rng(seed),
            draw_count: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn draw_count(&self) -> u64 {
        self.draw_count
    }

    /// Draws one coordinate index, uniform over `0..n`.
    pub fn sample_coordinate(&mut self) -> usize {
        self.draw_count += 1;
        if self.n == 1 {
            return 0;
        }
        self.rng.random_range(0..self.n)
    }
}

/// Uniform-with-replacement sampler over data rows, on the data stream.
#[derive(Debug, Clone)]
pub struct DataSampler {
    m: usize,
    rng: ChaCha8Rng,
}

impl DataSampler {
    pub fn new(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("data sampler requires m >= 1"));
        }
        Ok(DataSampler {
            m,
            rng: data_rng(seed),
        })
    }

    pub fn sample(&mut self) -> usize {
        if self.m == 1 {
            return 0;
        }
        self.rng.random_range(0..self.m)
    }
}
