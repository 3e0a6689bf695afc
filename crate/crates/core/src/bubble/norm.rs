//! Weighted sup-norms over a structured point cloud.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::dist2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Weight exponent (N-2)/2 + τ, prefactor λ^{-(N-2)/2}.
    Star,
    /// Weight exponent (N+2)/2 + τ, prefactor λ^{-(N+2)/2}.
    DoubleStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormKind {
    pub variant: NormKind,
    pub tau: f64,
    pub centers: Vec<Vec<f64>>,
    pub scale: f64,
}

impl WeightedNormKind {
    /// τ = (N-4)/(N-2).
    pub fn new(variant: NormKind, centers: Vec<Vec<f64>>, scale: f64) -> Self {
        let n = centers.first().map_or(0, Vec::len) as f64;
        WeightedNormKind {
            variant,
            tau: (n - 4.0) / (n - 2.0),
            centers,
            scale,
        }
    }

    fn exponent(&self, dim: usize) -> f64 {
        let n = dim as f64;
        match self.variant {
            NormKind::Star => (n - 2.0) / 2.0,
            NormKind::DoubleStar => (n + 2.0) / 2.0,
        }
    }

    /// `λ^{e} Σ_j (1 + λ|y - x_j|)^{-(e + τ)}` with `e` the variant exponent.
    pub fn weight(&self, y: &[f64]) -> f64 {
        let e = self.exponent(y.len());
        let s: f64 = self
            .centers
            .iter()
            .map(|c| (1.0 + self.scale * dist2(y, c).sqrt()).powf(-(e + self.tau)))
            .sum();
        self.scale.powf(e) * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub argmax: usize,
    pub point: Vec<f64>,
}

/// Sample layout: around each anchor, rays along ±e_i and along `diagonals`
/// fixed sign-pattern directions, at radii `{0} ∪ {2^{k/per_octave} / (64 s)}`
/// up to `far_radius`; plus far-field points on ±e_i rays from the origin at
/// radii `far_radius · 2^k`, k = 0..far_octaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    pub anchors: Vec<(Vec<f64>, f64)>,
    pub far_radius: f64,
    pub per_octave: usize,
    pub diagonals: usize,
    pub far_octaves: usize,
}

impl CloudSpec {
    pub fn around(centers: &[Vec<f64>], scale: f64, far_radius: f64) -> Self {
        CloudSpec {
            anchors: centers.iter().map(|c| (c.clone(), scale)).collect(),
            far_radius,
            per_octave: 8,
            diagonals: 4,
            far_octaves: 8,
        }
    }

    pub fn with_anchors(mut self, centers: &[Vec<f64>], scale: f64) -> Self {
        self.anchors.extend(centers.iter().map(|c| (c.clone(), scale)));
        self
    }
}

fn directions(dim: usize, diagonals: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim + diagonals);
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            dirs.push(e);
        }
    }
    let norm = 1.0 / (dim as f64).sqrt();
    for d in 0..diagonals {
        dirs.push(
            (0..dim)
                .map(|i| if (i + d) % 3 == 0 || (i * (d + 1)) % 2 == 1 { -norm } else { norm })
                .collect(),
        );
    }
    dirs
}

pub fn structured_cloud(dim: usize, spec: &CloudSpec) -> Vec<Vec<f64>> {
    let dirs = directions(dim, spec.diagonals);
    let mut cloud = Vec::new();
    for (center, scale) in &spec.anchors {
        cloud.push(center.clone());
        let base = 1.0 / (64.0 * scale);
        let mut k = 0;
        loop {
            let rho = base * 2f64.powf(k as f64 / spec.per_octave as f64);
            if rho > spec.far_radius {
                break;
            }
            for d in &dirs {
                cloud.push(center.iter().zip(d).map(|(c, v)| c + rho * v).collect());
            }
            k += 1;
        }
    }
    for k in 0..spec.far_octaves {
        let rho = spec.far_radius * 2f64.powi(k as i32);
        for d in &dirs[..2 * dim] {
            cloud.push(d.iter().map(|v| rho * v).collect());
        }
    }
    cloud
}

/// `sup_cloud |u| / weight`. Ties resolve to the first point in cloud order.
pub fn weighted_norm<F>(u: F, cloud: &[Vec<f64>], kind: &WeightedNormKind) -> Result<NormResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if kind.centers.is_empty() {
        return Err(Error::InvalidParameter("weighted norm needs at least one center".into()));
    }
    let ratios: Vec<f64> = cloud
        .par_iter()
        .map(|y| {
            let v = u(y).abs();
            if v == 0.0 {
                0.0
            } else {
                v / kind.weight(y)
            }
        })
        .collect();
    let mut best = 0;
    for (i, r) in ratios.iter().enumerate() {
        if r.is_nan() {
            return Err(Error::NonFiniteIntegrand);
        }
        if *r > ratios[best] {
            best = i;
        }
    }
    Ok(NormResult {
        value: ratios[best],
        argmax: best,
        point: cloud[best].clone(),
    })
}
