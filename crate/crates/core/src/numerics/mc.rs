//! Importance-sampled Monte Carlo over ℝ^N.
//!
//! The proposal is a mixture of multivariate Student-t densities with two
//! degrees of freedom, `q_c(y) ∝ (1 + μ|y - c|²)^{-(N+2)/2}`, one per
//! importance center, plus a broad component on the centroid. Samples are
//! drawn in fixed-size shards; shard `k` uses the ChaCha stream `k` of the
//! seed, so the result does not depend on how shards are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{ball_volume, IntegralResult, QuadratureMethod, QuadratureSpec};
use crate::error::{Error, Result};
use crate::field::dist2;

pub const SHARD_SIZE: usize = 1 << 14;

#[derive(Debug, Clone)]
struct Component {
    center: Vec<f64>,
    sharpness: f64,
    weight: f64,
    norm: f64,
}

#[derive(Debug, Clone)]
pub struct ImportanceSampler {
    dim: usize,
    components: Vec<Component>,
    cumulative: Vec<f64>,
}

impl ImportanceSampler {
    pub fn new(dim: usize, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        for c in &spec.importance_centers {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
        }
        let centers = &spec.importance_centers;
        let broad_weight = if centers.is_empty() {
            1.0
        } else {
            spec.broad_weight
        };
        let unit_ball = ball_volume(dim);
        let half_dim = dim as f64 / 2.0;
        let make = |center: Vec<f64>, sharpness: f64, weight: f64| Component {
            norm: sharpness.powf(half_dim) / unit_ball,
            center,
            sharpness,
            weight,
        };
        let mut components = Vec::with_capacity(centers.len() + 1);
        if !centers.is_empty() {
            let each = (1.0 - broad_weight) / centers.len() as f64;
            for c in centers {
                components.push(make(c.clone(), spec.importance_sharpness, each));
            }
        }
        if broad_weight > 0.0 {
            let mut centroid = vec![0.0; dim];
            for c in centers {
                for (a, b) in centroid.iter_mut().zip(c) {
                    *a += b / centers.len() as f64;
                }
            }
            components.push(make(centroid, spec.broad_sharpness, broad_weight));
        }
        components.retain(|c| c.weight > 0.0);
        let mut acc = 0.0;
        let cumulative = components
            .iter()
            .map(|c| {
                acc += c.weight;
                acc
            })
            .collect();
        Ok(ImportanceSampler {
            dim,
            components,
            cumulative,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normalized mixture density.
    pub fn density(&self, y: &[f64]) -> f64 {
        let exponent = -(self.dim as f64 + 2.0) / 2.0;
        self.components
            .iter()
            .map(|c| c.weight * c.norm * (1.0 + c.sharpness * dist2(y, &c.center)).powf(exponent))
            .sum()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.components.len() - 1);
        let c = &self.components[k];
        // χ²₂ = -2 ln U; t₂ draw is Z / sqrt(W μ).
        let w = -2.0 * (1.0 - rng.random::<f64>()).ln();
        let scale = 1.0 / (w * c.sharpness).sqrt();
        for (o, m) in out.iter_mut().zip(&c.center) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + scale * z;
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }
}

/// Importance-sampled estimate of `∫_{ℝ^N} f`; the error is one standard error.
pub fn integrate_mc<F>(f: F, dim: usize, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if spec.method != QuadratureMethod::MonteCarlo {
        return Err(Error::InvalidQuadrature(
            "integrate_mc requires the monte_carlo method".into(),
        ));
    }
    let sampler = ImportanceSampler::new(dim, spec)?;
    let total = spec.order_or_samples;
    let shards = total.div_ceil(SHARD_SIZE);
    let per_shard: Vec<Result<Moments>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(shard as u64);
            let count = SHARD_SIZE.min(total - shard * SHARD_SIZE);
            let mut y = vec![0.0; dim];
            let mut m = Moments::default();
            for _ in 0..count {
                sampler.sample(&mut rng, &mut y);
                let q = sampler.density(&y);
                if !(q > 0.0 && q.is_finite()) {
                    return Err(Error::SamplerSupportMismatch);
                }
                let v = f(&y);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand);
                }
                m.push(v / q);
            }
            Ok(m)
        })
        .collect();
    let mut acc = Moments::default();
    for m in per_shard {
        acc = acc.merge(m?);
    }
    let variance = if acc.count > 1 {
        acc.m2 / (acc.count - 1) as f64
    } else {
        0.0
    };
    Ok(IntegralResult {
        value: acc.mean,
        error_estimate: (variance.max(0.0) / acc.count as f64).sqrt(),
        samples_used: acc.count,
    })
}
