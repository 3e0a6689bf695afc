//! Closed-form bubble calculus.
//!
//! `U_{x,λ}(y) = c_N (λ / (1 + λ²|y - x|²))^{(N-2)/2}` with
//! `c_N = [N(N-2)]^{(N-2)/4}` solves `-ΔU = U^{(N+2)/(N-2)}` on ℝ^N.

mod cutoff;
mod norm;
mod symmetry;
mod tower;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{dist2, Field, Jet};

pub use cutoff::{smooth_cutoff, smoothstep, CutoffSpec};
pub use norm::{structured_cloud, weighted_norm, CloudSpec, NormKind, NormResult, WeightedNormKind};
pub use symmetry::{dihedral_images, symmetrize, Symmetrized};
pub use tower::{
    eval_residual_ln, polygon_centers, polygon_centers_with_phase, ring_distance, Ansatz,
    AnsatzPart, KernelDerivatives, Ring, TowerConfig,
};

/// `c_N = [N(N-2)]^{(N-2)/4}`.
pub fn bubble_constant(dim: usize) -> f64 {
    let n = dim as f64;
    (n * (n - 2.0)).powf((n - 2.0) / 4.0)
}

/// `2* = 2N/(N-2)`.
pub fn critical_exponent(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * n / (n - 2.0)
}

/// The nonlinearity exponent `2* - 1 = (N+2)/(N-2)`.
pub fn nonlinear_power(dim: usize) -> f64 {
    let n = dim as f64;
    (n + 2.0) / (n - 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub center: Vec<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleDerivatives {
    /// ∂U/∂λ
    pub d_scale: f64,
    /// ∂U/∂y_i
    pub d_y: Vec<f64>,
}

impl BubbleParams {
    pub fn new(center: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("bubble scale must be positive, got {scale}")));
        }
        if center.len() < 3 {
            return Err(Error::InvalidParameter("bubbles need N >= 3".into()));
        }
        Ok(BubbleParams { center, scale })
    }

    pub fn at_origin(dim: usize, scale: f64) -> Self {
        BubbleParams {
            center: vec![0.0; dim],
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn exponent(&self) -> f64 {
        (self.dim() as f64 - 2.0) / 2.0
    }

    /// `(U, q)` with `q = 1 + λ²|y - x|²`.
    fn value_and_q(&self, y: &[f64]) -> (f64, f64) {
        let l = self.scale;
        let q = 1.0 + l * l * dist2(y, &self.center);
        (bubble_constant(self.dim()) * (l / q).powf(self.exponent()), q)
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.value_and_q(y).0
    }
}

/// Value with the analytic gradient and Laplacian.
pub fn eval_bubble(p: &BubbleParams, y: &[f64]) -> Jet {
    let n = p.dim() as f64;
    let l2 = p.scale * p.scale;
    let (u, q) = p.value_and_q(y);
    Jet {
        value: u,
        gradient: y
            .iter()
            .zip(&p.center)
            .map(|(a, c)| -(n - 2.0) * l2 * u * (a - c) / q)
            .collect(),
        laplacian: -n * (n - 2.0) * l2 * u / (q * q),
    }
}

pub fn eval_bubble_derivatives(p: &BubbleParams, y: &[f64]) -> BubbleDerivatives {
    let jet = eval_bubble(p, y);
    let n = p.dim() as f64;
    let l = p.scale;
    let r2 = dist2(y, &p.center);
    let q = 1.0 + l * l * r2;
    BubbleDerivatives {
        d_scale: 0.5 * (n - 2.0) * jet.value * (1.0 - l * l * r2) / (l * q),
        d_y: jet.gradient,
    }
}

/// Jet of `∂U/∂y_i`.
pub fn bubble_dy_jet(p: &BubbleParams, i: usize, y: &[f64]) -> Jet {
    let n = p.dim() as f64;
    let l2 = p.scale * p.scale;
    let base = eval_bubble(p, y);
    let (u, du) = (base.value, &base.gradient);
    let r2 = dist2(y, &p.center);
    let q = 1.0 + l2 * r2;
    let di = y[i] - p.center[i];
    let gradient = (0..p.dim())
        .map(|j| {
            let dj = y[j] - p.center[j];
            let delta = if i == j { u / q } else { 0.0 };
            -(n - 2.0) * l2 * (du[j] * di / q + delta - 2.0 * l2 * u * di * dj / (q * q))
        })
        .collect();
    Jet {
        value: du[i],
        gradient,
        laplacian: -n * (n - 2.0) * l2 * (du[i] / (q * q) - 4.0 * l2 * u * di / (q * q * q)),
    }
}

/// Jet of `∂U/∂λ`.
pub fn bubble_dscale_jet(p: &BubbleParams, y: &[f64]) -> Jet {
    let n = p.dim() as f64;
    let l = p.scale;
    let l2 = l * l;
    let u = p.value(y);
    let r2 = dist2(y, &p.center);
    let q = 1.0 + l2 * r2;
    let ul = 0.5 * (n - 2.0) * u * (1.0 - l2 * r2) / (l * q);
    let radial = 2.0 * l * u / q + l2 * ul / q - 2.0 * l2 * l * r2 * u / (q * q);
    Jet {
        value: ul,
        gradient: y
            .iter()
            .zip(&p.center)
            .map(|(a, c)| -(n - 2.0) * (a - c) * radial)
            .collect(),
        laplacian: -n
            * (n - 2.0)
            * (2.0 * l * u / (q * q) + l2 * ul / (q * q) - 4.0 * l2 * l * r2 * u / (q * q * q)),
    }
}

impl Field for BubbleParams {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, y: &[f64]) -> f64 {
        BubbleParams::value(self, y)
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        Some(eval_bubble(self, y))
    }
}

/// The field `∂U/∂y_i`.
#[derive(Debug, Clone)]
pub struct BubbleDy {
    pub bubble: BubbleParams,
    pub axis: usize,
}

impl Field for BubbleDy {
    fn dim(&self) -> usize {
        self.bubble.dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        bubble_dy_jet(&self.bubble, self.axis, y).value
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        Some(bubble_dy_jet(&self.bubble, self.axis, y))
    }
}

/// The field `∂U/∂λ`.
#[derive(Debug, Clone)]
pub struct BubbleDScale {
    pub bubble: BubbleParams,
}

impl Field for BubbleDScale {
    fn dim(&self) -> usize {
        self.bubble.dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        bubble_dscale_jet(&self.bubble, y).value
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        Some(bubble_dscale_jet(&self.bubble, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::finite_difference_jet;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn profile_values() {
        let p = BubbleParams::at_origin(7, 1.0);
        let c = 35f64.powf(1.25);
        assert!((p.value(&[0.0; 7]) - c).abs() < 1e-12);
        assert!((c - 85.1305).abs() < 1e-3);
        let mut y = [0.0; 7];
        y[3] = 1.0;
        assert!((p.value(&y) - c / 2f64.powf(2.5)).abs() < 1e-12);
        assert!((p.value(&y) - 15.049).abs() < 1e-3);
    }

    #[test]
    fn gradient_vanishes_at_center() {
        let p = BubbleParams::new(vec![0.3, -1.0, 2.0, 0.0, 0.5], 3.0).unwrap();
        let d = eval_bubble_derivatives(&p, &p.center.clone());
        assert!(d.d_y.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn scale_derivative_at_center() {
        let p = BubbleParams::at_origin(7, 1.0);
        let d = eval_bubble_derivatives(&p, &[0.0; 7]);
        assert!((d.d_scale - 2.5 * 35f64.powf(1.25)).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(BubbleParams::new(vec![0.0; 5], 0.0).is_err());
        assert!(BubbleParams::new(vec![0.0; 5], f64::NAN).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let dim = rng.random_range(3..9);
            let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let scale = rng.random_range(0.5..3.0);
            let p = BubbleParams::new(center, scale).unwrap();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
            let h = 1e-5;
            let d = eval_bubble_derivatives(&p, &y);
            let grad_scale = d.d_y.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            let fd = finite_difference_jet(&p, &y, h);
            for (a, b) in d.d_y.iter().zip(&fd.gradient) {
                assert!((a - b).abs() < 1e-6 * grad_scale.max(p.value(&y)), "{a} vs {b}");
            }
            let up = BubbleParams::at_origin(dim, scale + h);
            let down = BubbleParams::at_origin(dim, scale - h);
            let shifted: Vec<f64> = y.iter().zip(&p.center).map(|(a, c)| a - c).collect();
            let fd_scale = (up.value(&shifted) - down.value(&shifted)) / (2.0 * h);
            assert!((d.d_scale - fd_scale).abs() < 1e-6 * d.d_scale.abs().max(p.value(&y)));
        }
    }

    #[test]
    fn derivative_jets_match_finite_differences() {
        let p = BubbleParams::new(vec![0.2, -0.1, 0.4, 0.0, 0.3], 1.7).unwrap();
        let y = [0.5, 0.3, -0.2, 0.1, 0.6];
        let fields: Vec<Box<dyn Field>> = vec![
            Box::new(BubbleDy { bubble: p.clone(), axis: 0 }),
            Box::new(BubbleDy { bubble: p.clone(), axis: 3 }),
            Box::new(BubbleDScale { bubble: p.clone() }),
        ];
        for f in &fields {
            let exact = f.jet(&y).unwrap();
            let fd = finite_difference_jet(f, &y, 1e-4);
            let scale = exact.gradient.iter().fold(exact.value.abs(), |a, g| a.max(g.abs()));
            for (a, b) in exact.gradient.iter().zip(&fd.gradient) {
                assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b}");
            }
            assert!((exact.laplacian - fd.laplacian).abs() < 1e-5 * scale.max(exact.laplacian.abs()));
        }
    }

    #[test]
    fn derivative_fields_solve_the_linearized_equation() {
        // -Δψ = p U^{p-1} ψ for ψ = ∂U/∂y_i and ∂U/∂λ.
        let p = BubbleParams::new(vec![0.0, 0.1, 0.0, 0.0, 0.0], 2.0).unwrap();
        let pw = nonlinear_power(5);
        for y in [[0.3, 0.2, 0.1, -0.4, 0.0], [1.0, -2.0, 0.5, 0.0, 3.0]] {
            let u = p.value(&y);
            for jet in [bubble_dy_jet(&p, 0, &y), bubble_dscale_jet(&p, &y)] {
                let rhs = pw * u.powf(pw - 1.0) * jet.value;
                assert!(rel(-jet.laplacian, rhs) < 1e-12, "{} vs {rhs}", -jet.laplacian);
            }
        }
    }

    proptest! {
        #[test]
        fn pde_identity(dim in 3usize..12, scale in 0.05f64..50.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = BubbleParams::new(center, scale).unwrap();
            let jet = eval_bubble(&p, &y);
            let rhs = jet.value.powf(nonlinear_power(dim));
            prop_assert!(rel(-jet.laplacian, rhs) < 1e-10);
        }

        #[test]
        fn scale_covariance(dim in 3usize..10, scale in 0.1f64..100.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = BubbleParams::new(center.clone(), scale).unwrap();
            let unit = BubbleParams::at_origin(dim, 1.0);
            let z: Vec<f64> = y.iter().zip(&center).map(|(a, c)| scale * (a - c)).collect();
            let expected = scale.powf((dim as f64 - 2.0) / 2.0) * unit.value(&z);
            prop_assert!(rel(p.value(&y), expected) < 1e-13);
        }
    }
}
