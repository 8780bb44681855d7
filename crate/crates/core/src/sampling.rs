//! Control-noise generation for the rollouts.
//!
//! Every rollout `k` draws from its own ChaCha stream selected by
//! `(seed, k)`, so a batch is a pure function of the seed no matter how the
//! rollouts are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One 2-D perturbation: (v noise m/s, omega noise rad/s).
pub type Noise = [f64; 2];

/// Dedicated random stream for rollout `k` under `seed`.
pub fn rollout_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// K × T noise vectors, rollout-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseBatch {
    pub epsilons: Vec<Noise>,
    pub num_rollouts: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl NoiseBatch {
    pub fn rollout(&self, k: usize) -> &[Noise] {
        &self.epsilons[k * self.horizon..(k + 1) * self.horizon]
    }

    pub fn get(&self, k: usize, tau: usize) -> Noise {
        self.epsilons[k * self.horizon + tau]
    }
}

/// Lognormal factor of the normal × lognormal (NLN) mixture.
///
/// `sigma_ln` holds the standard deviations of the underlying normal in log
/// space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlnParams {
    pub mu_ln: [f64; 2],
    pub sigma_ln: [f64; 2],
}

impl Default for NlnParams {
    fn default() -> Self {
        Self {
            mu_ln: [-0.020, -0.020],
            sigma_ln: [0.141, 0.141],
        }
    }
}

impl NlnParams {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma_ln.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::param("sigma_ln", "diagonal entries must be > 0"));
        }
        if !self.mu_ln.iter().all(|m| m.is_finite()) {
            return Err(Error::param("mu_ln", "must be finite"));
        }
        Ok(())
    }

    /// Second moment of the lognormal factor, E[Y²] = exp(2μ + 2σ²).
    pub fn second_moment(&self, dim: usize) -> f64 {
        (2.0 * self.mu_ln[dim] + 2.0 * self.sigma_ln[dim].powi(2)).exp()
    }

    /// Kurtosis of the product N(0, s²)·Y: 3·exp(4σ²).
    pub fn product_kurtosis(&self, dim: usize) -> f64 {
        3.0 * (4.0 * self.sigma_ln[dim].powi(2)).exp()
    }
}

/// Noise distribution used by a planner.
#[derive(Clone, Debug)]
pub enum NoiseSampler {
    Gaussian {
        std_dev: [f64; 2],
    },
    Nln {
        std_dev: [f64; 2],
        lognormal: [LogNormal<f64>; 2],
        params: NlnParams,
    },
}

impl NoiseSampler {
    /// Zero-mean Gaussian with diagonal covariance `variance`.
    pub fn gaussian(variance: [f64; 2]) -> Result<Self> {
        Ok(NoiseSampler::Gaussian {
            std_dev: std_devs(variance)?,
        })
    }

    /// Normal(0, variance) × LogNormal(mu_ln, sigma_ln), per dimension.
    pub fn nln(variance: [f64; 2], params: NlnParams) -> Result<Self> {
        params.validate()?;
        let make = |d: usize| {
            LogNormal::new(params.mu_ln[d], params.sigma_ln[d])
                .map_err(|e| Error::param("sigma_ln", e.to_string()))
        };
        Ok(NoiseSampler::Nln {
            std_dev: std_devs(variance)?,
            lognormal: [make(0)?, make(1)?],
            params,
        })
    }

    /// Fills one rollout's noise from its dedicated stream.
    #[inline]
    pub fn fill_rollout(&self, seed: u64, k: usize, out: &mut [Noise]) {
        let mut rng = rollout_rng(seed, k);
        match self {
            NoiseSampler::Gaussian { std_dev } => {
                for e in out.iter_mut() {
                    let z0: f64 = StandardNormal.sample(&mut rng);
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    *e = [std_dev[0] * z0, std_dev[1] * z1];
                }
            }
            NoiseSampler::Nln {
                std_dev, lognormal, ..
            } => {
                for e in out.iter_mut() {
                    let z0: f64 = StandardNormal.sample(&mut rng);
                    let y0 = lognormal[0].sample(&mut rng);
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let y1 = lognormal[1].sample(&mut rng);
                    *e = [std_dev[0] * z0 * y0, std_dev[1] * z1 * y1];
                }
            }
        }
    }

    /// Full K × T batch, rollouts generated in parallel.
    pub fn sample(&self, num_rollouts: usize, horizon: usize, seed: u64) -> NoiseBatch {
        let mut epsilons = vec![[0.0; 2]; num_rollouts * horizon];
        if horizon > 0 {
            epsilons
                .par_chunks_mut(horizon)
                .enumerate()
                .for_each(|(k, chunk)| self.fill_rollout(seed, k, chunk));
        }
        NoiseBatch {
            epsilons,
            num_rollouts,
            horizon,
            seed,
        }
    }
}

fn std_devs(variance: [f64; 2]) -> Result<[f64; 2]> {
    if !variance.iter().all(|v| v.is_finite() && *v >= 0.0) {
        return Err(Error::param("noise_variance", "entries must be finite and >= 0"));
    }
    Ok([variance[0].sqrt(), variance[1].sqrt()])
}

/// I.i.d. zero-mean Gaussian noise with per-dimension variance `variance`.
pub fn sample_gaussian(
    num_rollouts: usize,
    horizon: usize,
    variance: [f64; 2],
    seed: u64,
) -> Result<NoiseBatch> {
    Ok(NoiseSampler::gaussian(variance)?.sample(num_rollouts, horizon, seed))
}

/// Normal × lognormal mixture noise.
pub fn sample_nln(
    num_rollouts: usize,
    horizon: usize,
    variance: [f64; 2],
    nln: NlnParams,
    seed: u64,
) -> Result<NoiseBatch> {
    Ok(NoiseSampler::nln(variance, nln)?.sample(num_rollouts, horizon, seed))
}
