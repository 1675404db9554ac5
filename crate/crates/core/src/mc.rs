//! Seeded, chunked Monte Carlo estimation.
//!
//! A run of `n_samples` draws is cut into fixed-size chunks. Chunk `c` draws
//! from the ChaCha8 stream `c` of the generator seeded with `seed`, so the
//! result depends only on `(seed, chunk_size, n_samples)` and never on the
//! number of worker threads. Chunk accumulators are merged in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type McRng = ChaCha8Rng;

pub const DEFAULT_CHUNK: usize = 4096;

/// Generator for stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed; used to give independent experiments distinct seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, se: 0.0, n: 0 }
    }

    /// `|mean - target| <= k * se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub n_samples: usize,
    pub chunk_size: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McConfig { n_samples, chunk_size: DEFAULT_CHUNK, seed }
    }

    pub fn with_chunk(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size.max(1);
        self
    }
}

#[derive(Clone, Debug)]
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Welford { n: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for k in 0..self.mean.len() {
            let delta = other.mean[k] - self.mean[k];
            self.mean[k] += delta * nb / n;
            self.m2[k] += other.m2[k] + delta * delta * na * nb / n;
        }
        self.n += other.n;
    }

    fn finish(&self) -> Vec<Estimate> {
        let n = self.n;
        self.mean
            .iter()
            .zip(&self.m2)
            .map(|(&mean, &m2)| {
                let se = if n >= 2 {
                    (m2.max(0.0) / ((n - 1) as f64) / n as f64).sqrt()
                } else {
                    0.0
                };
                Estimate { mean, se, n }
            })
            .collect()
    }
}

/// Component-wise Monte Carlo means of a vector-valued sampler.
///
/// `sample` fills a buffer of length `dim` from one draw.
pub fn mc_vec<F>(cfg: McConfig, dim: usize, sample: F) -> Result<Vec<Estimate>>
where
    F: Fn(&mut McRng, &mut [f64]) -> Result<()> + Sync,
{
    if cfg.n_samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo sample size must be positive".into()));
    }
    let chunk = cfg.chunk_size.max(1);
    let n_chunks = cfg.n_samples.div_ceil(chunk);
    let parts: Vec<Result<Welford>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(cfg.seed, c as u64);
            let len = chunk.min(cfg.n_samples - c * chunk);
            let mut acc = Welford::new(dim);
            let mut buf = vec![0.0; dim];
            for _ in 0..len {
                sample(&mut rng, &mut buf)?;
                if let Some(bad) = buf.iter().find(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("Monte Carlo sample value {bad}")));
                }
                acc.push(&buf);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Welford::new(dim);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total.finish())
}

/// Scalar Monte Carlo mean.
pub fn mc_mean<F>(cfg: McConfig, sample: F) -> Result<Estimate>
where
    F: Fn(&mut McRng) -> Result<f64> + Sync,
{
    let est = mc_vec(cfg, 1, |rng, out| {
        out[0] = sample(rng)?;
        Ok(())
    })?;
    Ok(est[0])
}
