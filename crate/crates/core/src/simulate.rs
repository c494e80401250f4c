//! Seeded exact samplers for the restart chain, the endogenous process and
//! the observed returns.
//!
//! Stream splitting: a [`SeedSpec`] `(seed, stream)` drives two independent
//! ChaCha8 generators keyed by `seed`, the restart chain on stream
//! `2 * stream` and the endogenous process on stream `2 * stream + 1`.
//! Replicas use distinct `stream` values.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{rescale_factor, ModelParams, VolatilityMixture};
use crate::special::beta_inc_inv;
use crate::Result;

const RESUM_INTERVAL: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeedSpec { seed, stream }
    }

    fn rng(&self, component: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream.wrapping_mul(2).wrapping_add(component));
        rng
    }

    pub fn restart_rng(&self) -> ChaCha8Rng {
        self.rng(0)
    }

    pub fn endogenous_rng(&self) -> ChaCha8Rng {
        self.rng(1)
    }
}

/// Sampler for the residual law with density proportional to
/// `(1 + z^2)^{-(dof+1)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualSampler {
    /// Polar rejection transform of a uniform pair.
    #[default]
    Polar,
    /// Inversion of the distribution function.
    InverseCdf,
}

impl ResidualSampler {
    pub fn sample<R: RngCore + ?Sized>(&self, dof: f64, rng: &mut R) -> f64 {
        match self {
            ResidualSampler::Polar => loop {
                let u: f64 = 2.0 * rng.random::<f64>() - 1.0;
                let v: f64 = 2.0 * rng.random::<f64>() - 1.0;
                let w = u * u + v * v;
                if w > 0.0 && w <= 1.0 {
                    let c = (-(2.0 / dof) * w.ln()).exp_m1();
                    return u * (c / w).sqrt();
                }
            },
            ResidualSampler::InverseCdf => {
                let u: f64 = rng.random::<f64>();
                let sign = if u < 0.5 { -1.0 } else { 1.0 };
                // |Z| has P(|Z| <= z) = I_{z^2/(1+z^2)}(1/2, dof/2).
                let p = (2.0 * u - 1.0).abs();
                let z2 = if p <= 0.5 {
                    let x = beta_inc_inv(0.5, 0.5 * dof, p);
                    x / (1.0 - x)
                } else {
                    let y = beta_inc_inv(0.5 * dof, 0.5, 1.0 - p);
                    (1.0 - y) / y
                };
                sign * z2.sqrt()
            }
        }
    }
}

/// Realization of `(I_t, Y_t, X_t)` for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub i: Vec<u64>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub params: ModelParams,
}

impl SimulatedPath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Times `t` (1-based) with `I_t = 1`.
    pub fn restart_times(&self) -> Vec<usize> {
        self.i.iter().enumerate().filter(|(_, &i)| i == 1).map(|(t, _)| t + 1).collect()
    }
}

pub fn sample_restart_path(nu: f64, len: usize, seed: SeedSpec) -> Vec<u64> {
    let mut rng = seed.restart_rng();
    restart_path_with(nu, len, &mut rng)
}

fn restart_path_with<R: RngCore>(nu: f64, len: usize, rng: &mut R) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let mut i = if nu >= 1.0 {
        1
    } else {
        let u = 1.0 - rng.random::<f64>();
        1 + (u.ln() / (-nu).ln_1p()).floor() as u64
    };
    out.push(i);
    for _ in 1..len {
        i = if rng.random::<f64>() < nu { 1 } else { i + 1 };
        out.push(i);
    }
    out
}

pub fn sample_endogenous(params: &ModelParams, len: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    sample_endogenous_with(params, len, seed, ResidualSampler::default())
}

pub fn sample_endogenous_with(
    params: &ModelParams,
    len: usize,
    seed: SeedSpec,
    sampler: ResidualSampler,
) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = seed.endogenous_rng();
    let mut out = Vec::with_capacity(len);
    match params.mixture {
        VolatilityMixture::Point { sigma0 } => {
            for _ in 0..len {
                let n: f64 = rng.sample(StandardNormal);
                out.push(sigma0 * n);
            }
        }
        VolatilityMixture::InverseGamma { alpha, beta } => {
            let m = params.memory;
            let beta2 = beta * beta;
            let mut ring = alloc::vec![0.0; m];
            let mut sum = 0.0;
            for t in 0..len {
                let filled = t.min(m);
                let dof = alpha + filled as f64;
                let z = sampler.sample(dof, &mut rng);
                let y = (beta2 + sum).sqrt() * z;
                out.push(y);
                let slot = t % m;
                if t >= m {
                    sum -= ring[slot];
                }
                ring[slot] = y * y;
                sum += y * y;
                if (t + 1) % RESUM_INTERVAL == 0 {
                    sum = ring.iter().sum();
                }
            }
        }
    }
    Ok(out)
}

pub fn sample_returns(params: &ModelParams, len: usize, seed: SeedSpec) -> Result<SimulatedPath> {
    sample_returns_with(params, len, seed, ResidualSampler::default())
}

pub fn sample_returns_with(
    params: &ModelParams,
    len: usize,
    seed: SeedSpec,
    sampler: ResidualSampler,
) -> Result<SimulatedPath> {
    params.validate()?;
    let i = sample_restart_path(params.nu, len, seed);
    let y = sample_endogenous_with(params, len, seed, sampler)?;
    let mut cache: Vec<f64> = Vec::new();
    let x = i
        .iter()
        .zip(&y)
        .map(|(&idx, &yv)| {
            let k = idx as usize;
            if k <= 4096 {
                while cache.len() < k {
                    cache.push(rescale_factor(cache.len() as u64 + 1, params.d));
                }
                cache[k - 1] * yv
            } else {
                rescale_factor(idx, params.d) * yv
            }
        })
        .collect();
    Ok(SimulatedPath { i, y, x, params: *params })
}
