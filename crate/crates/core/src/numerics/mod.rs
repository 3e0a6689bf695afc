//! Deterministic quadrature kernels shared by the rest of the crate.

mod domain;
mod gauss;
mod mc;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use domain::{
    integrate_boundary_vec, integrate_volume, integrate_volume_vec, surface_integrate, Boundary,
    Domain, SectorFace, SurfacePoint,
};
pub use gauss::{integrate_radial, integrate_radial_scaled, GaussLegendre};
pub use mc::{integrate_mc, ImportanceSampler, SHARD_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    RadialGauss,
    TensorGauss,
    MonteCarlo,
}

impl QuadratureMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            QuadratureMethod::RadialGauss => "radial_gauss",
            QuadratureMethod::TensorGauss => "tensor_gauss",
            QuadratureMethod::MonteCarlo => "monte_carlo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "radial_gauss" => Some(QuadratureMethod::RadialGauss),
            "tensor_gauss" => Some(QuadratureMethod::TensorGauss),
            "monte_carlo" => Some(QuadratureMethod::MonteCarlo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    /// Gauss order per axis, or the Monte-Carlo sample count.
    pub order_or_samples: usize,
    pub seed: u64,
    /// Centers of the concentrated mixture components (Monte Carlo only).
    pub importance_centers: Vec<Vec<f64>>,
    /// The `μ` of the component density `(1 + μ|y - p|²)^{-(N+2)/2}`.
    pub importance_sharpness: f64,
    /// Mixture weight of the broad component.
    pub broad_weight: f64,
    /// Sharpness of the broad component, centered on the centroid.
    pub broad_sharpness: f64,
}

impl QuadratureSpec {
    fn with_method(method: QuadratureMethod, order_or_samples: usize) -> Self {
        QuadratureSpec {
            method,
            order_or_samples,
            seed: 0,
            importance_centers: Vec::new(),
            importance_sharpness: 1.0,
            broad_weight: 0.1,
            broad_sharpness: 1.0,
        }
    }

    pub fn radial_gauss(order: usize) -> Self {
        Self::with_method(QuadratureMethod::RadialGauss, order)
    }

    pub fn tensor_gauss(order: usize) -> Self {
        Self::with_method(QuadratureMethod::TensorGauss, order)
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            seed,
            ..Self::with_method(QuadratureMethod::MonteCarlo, samples)
        }
    }

    pub fn with_centers(mut self, centers: Vec<Vec<f64>>, sharpness: f64) -> Self {
        self.importance_centers = centers;
        self.importance_sharpness = sharpness;
        self
    }

    pub fn with_broad(mut self, weight: f64, sharpness: f64) -> Self {
        self.broad_weight = weight;
        self.broad_sharpness = sharpness;
        self
    }

    pub fn with_order(&self, order_or_samples: usize) -> Self {
        QuadratureSpec {
            order_or_samples,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order_or_samples < 1 {
            return Err(Error::InvalidQuadrature("order_or_samples must be >= 1".into()));
        }
        if self.method == QuadratureMethod::MonteCarlo {
            if !(self.importance_sharpness > 0.0 && self.importance_sharpness.is_finite()) {
                return Err(Error::InvalidQuadrature("importance sharpness must be positive".into()));
            }
            if !(0.0..=1.0).contains(&self.broad_weight) {
                return Err(Error::InvalidQuadrature("broad weight must lie in [0, 1]".into()));
            }
            if self.importance_centers.is_empty() && self.broad_weight == 0.0 {
                return Err(Error::InvalidQuadrature("mixture has no components".into()));
            }
            if !(self.broad_sharpness > 0.0 && self.broad_sharpness.is_finite()) {
                return Err(Error::InvalidQuadrature("broad sharpness must be positive".into()));
            }
        }
        Ok(())
    }

    /// Short description identifying every input that affects a result.
    pub fn fingerprint(&self) -> String {
        match self.method {
            QuadratureMethod::MonteCarlo => format!(
                "monte_carlo:samples={}:seed={}:centers={}:sharpness={:e}:broad={:e}/{:e}",
                self.order_or_samples,
                self.seed,
                self.importance_centers.len(),
                self.importance_sharpness,
                self.broad_weight,
                self.broad_sharpness
            ),
            m => format!("{}:order={}", m.as_str(), self.order_or_samples),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub samples_used: usize,
}

/// Area of the unit sphere S^{N-1} ⊂ ℝ^N, i.e. ω_{N-1} = 2π^{N/2} / Γ(N/2).
pub fn sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * PI.powf(half) / statrs::function::gamma::gamma(half)
}

/// Volume of the unit ball in ℝ^N.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        // ω_6 = 16π³/15
        assert!((sphere_area(7) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-11);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::radial_gauss(0).validate().is_err());
        assert!(QuadratureSpec::monte_carlo(10, 0)
            .with_broad(0.0, 1.0)
            .validate()
            .is_err());
        assert!(QuadratureSpec::monte_carlo(10, 0).validate().is_ok());
    }
}
