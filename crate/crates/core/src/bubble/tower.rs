use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{eval_bubble, eval_bubble_derivatives, nonlinear_power, smooth_cutoff, BubbleParams, CutoffSpec};
use crate::error::{Error, Result};
use crate::field::{Field, Jet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ring {
    /// Centers in the (y₁, y₂)-plane, (y₃, y₄) = 0.
    Inner12,
    /// Centers in the (y₃, y₄)-plane, (y₁, y₂) = 0.
    Inner34,
}

impl Ring {
    fn axes(self) -> (usize, usize) {
        match self {
            Ring::Inner12 => (0, 1),
            Ring::Inner34 => (2, 3),
        }
    }
}

/// `k` points at angles `2(j-1)π/k`, radius `rho`, sharing the tail.
pub fn polygon_centers(ring: Ring, k: usize, rho: f64, tail: &[f64]) -> Vec<Vec<f64>> {
    polygon_centers_with_phase(ring, k, rho, tail, 0.0)
}

pub fn polygon_centers_with_phase(ring: Ring, k: usize, rho: f64, tail: &[f64], phase: f64) -> Vec<Vec<f64>> {
    let (a, b) = ring.axes();
    (0..k)
        .map(|j| {
            let theta = phase + 2.0 * j as f64 * PI / k as f64;
            let mut p = vec![0.0; 4 + tail.len()];
            p[a] = rho * theta.cos();
            p[b] = rho * theta.sin();
            p[4..].copy_from_slice(tail);
            p
        })
        .collect()
}

/// `|p₁ - p_{j+1}| = 2ρ sin(jπ/k)`.
pub fn ring_distance(k: usize, rho: f64, j: usize) -> f64 {
    2.0 * rho * (j as f64 * PI / k as f64).sin()
}

/// Two-ring glued ansatz: `m` bubbles of scale λ on the (y₁,y₂)-circle of
/// radius r̄ and `n` bubbles of scale μ on the (y₃,y₄)-circle of radius t,
/// all multiplied by the cut-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerConfig {
    pub m: usize,
    pub r_bar: f64,
    pub lambda: f64,
    pub n: usize,
    pub t: f64,
    pub mu: f64,
    pub tail: Vec<f64>,
    pub cutoff: CutoffSpec,
    /// Angle of the first n-ring center (0 in the standard placement).
    #[serde(default)]
    pub n_phase: f64,
}

impl TowerConfig {
    pub fn dim(&self) -> usize {
        4 + self.tail.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.dim() < 7 {
            return bad("two-ring configurations need N >= 7");
        }
        if self.m < 2 || self.m % 2 != 0 || self.n < 2 || self.n % 2 != 0 {
            return bad("ring sizes must be even and at least 2");
        }
        if !(self.r_bar > 0.0 && self.t > 0.0) {
            return bad("ring radii must be positive");
        }
        if !(self.lambda > 0.0 && self.mu > 0.0) {
            return bad("bubble scales must be positive");
        }
        if self.cutoff.dim() != self.dim() || self.cutoff.radial_dims != 4 {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: self.cutoff.dim(),
            });
        }
        Ok(())
    }

    /// Distance of both rings' (radius, tail) from the cut-off anchor must not
    /// exceed `theta`.
    pub fn check_near_anchor(&self, theta: f64) -> Result<()> {
        for rho in [self.r_bar, self.t] {
            let mut d2 = (rho - self.cutoff.r0).powi(2);
            for (a, b) in self.tail.iter().zip(&self.cutoff.tail0) {
                d2 += (a - b) * (a - b);
            }
            if d2.sqrt() > theta {
                return Err(Error::InvalidParameter(format!(
                    "ring parameters farther than {theta} from the anchor"
                )));
            }
        }
        Ok(())
    }

    pub fn m_centers(&self) -> Vec<Vec<f64>> {
        polygon_centers(Ring::Inner12, self.m, self.r_bar, &self.tail)
    }

    pub fn n_centers(&self) -> Vec<Vec<f64>> {
        polygon_centers_with_phase(Ring::Inner34, self.n, self.t, &self.tail, self.n_phase)
    }

    pub fn m_bubbles(&self) -> Vec<BubbleParams> {
        self.m_centers()
            .into_iter()
            .map(|c| BubbleParams { center: c, scale: self.lambda })
            .collect()
    }

    pub fn n_bubbles(&self) -> Vec<BubbleParams> {
        self.n_centers()
            .into_iter()
            .map(|c| BubbleParams { center: c, scale: self.mu })
            .collect()
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        TowerConfig { mu, ..self.clone() }
    }

    /// ∂/∂μ, ∂/∂t, ∂/∂ỹ* of `Z_{p_j,μ} = ζ̂ U_{p_j,μ}` at `y`, for ring
    /// index `j` (0-based).
    pub fn kernel_derivatives(&self, j: usize, y: &[f64]) -> KernelDerivatives {
        let zeta = smooth_cutoff(&self.cutoff, y).value;
        let theta = self.n_phase + 2.0 * j as f64 * PI / self.n as f64;
        let p = BubbleParams {
            center: self.n_centers()[j].clone(),
            scale: self.mu,
        };
        let d = eval_bubble_derivatives(&p, y);
        // U depends on the center through y - p, so ∂U/∂p_i = -∂U/∂y_i.
        KernelDerivatives {
            d_mu: zeta * d.d_scale,
            d_t: -zeta * (d.d_y[2] * theta.cos() + d.d_y[3] * theta.sin()),
            d_tail: d.d_y[4..].iter().map(|g| -zeta * g).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDerivatives {
    pub d_mu: f64,
    pub d_t: f64,
    pub d_tail: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzPart {
    Both,
    MRing,
    NRing,
}

/// `Σ ζ̂ U` over the selected rings, as a field with full jet.
#[derive(Debug, Clone)]
pub struct Ansatz {
    cutoff: CutoffSpec,
    bubbles: Vec<BubbleParams>,
}

impl Ansatz {
    pub fn new(cfg: &TowerConfig, part: AnsatzPart) -> Self {
        let mut bubbles = Vec::new();
        if part != AnsatzPart::NRing {
            bubbles.extend(cfg.m_bubbles());
        }
        if part != AnsatzPart::MRing {
            bubbles.extend(cfg.n_bubbles());
        }
        Ansatz {
            cutoff: cfg.cutoff.clone(),
            bubbles,
        }
    }

    /// Jet of the raw bubble sum (no cut-off).
    pub fn bubble_sum(&self, y: &[f64]) -> Jet {
        let mut acc = Jet::zero(y.len());
        for b in &self.bubbles {
            acc.add_assign(&eval_bubble(b, y));
        }
        acc
    }
}

impl Field for Ansatz {
    fn dim(&self) -> usize {
        self.cutoff.dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        let zeta = smooth_cutoff(&self.cutoff, y).value;
        if zeta == 0.0 {
            return 0.0;
        }
        zeta * self.bubbles.iter().map(|b| b.value(y)).sum::<f64>()
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        Some(smooth_cutoff(&self.cutoff, y).product(&self.bubble_sum(y)))
    }
}

/// Pointwise residual of the n-ring correction problem:
///
/// `l_n = (u_m + ΣZ)^p - u_m^p - Σ ζ̂ U^p - V ΣZ + Z* Δζ̂ + 2 ∇ζ̂·∇Z*`
///
/// with `Z = ζ̂ U_{p_j,μ}`, `Z* = Σ U_{p_j,μ}` and `p = (N+2)/(N-2)`. `u_m` is
/// any stand-in for the m-ring solution (the m-ring ansatz, or zero).
pub fn eval_residual_ln(cfg: &TowerConfig, u_m: &dyn Field, v: &dyn Field, y: &[f64]) -> f64 {
    let p = nonlinear_power(cfg.dim());
    let cut = smooth_cutoff(&cfg.cutoff, y);
    let mut z_star = Jet::zero(y.len());
    let mut pure = 0.0;
    for b in cfg.n_bubbles() {
        let jet = eval_bubble(&b, y);
        pure += jet.value.powf(p);
        z_star.add_assign(&jet);
    }
    let sum_z = cut.value * z_star.value;
    let um = u_m.value(y).max(0.0);
    let grad_dot: f64 = cut.gradient.iter().zip(&z_star.gradient).map(|(a, b)| a * b).sum();
    (um + sum_z).powf(p) - um.powf(p) - cut.value * pure - v.value(y) * sum_z
        + z_star.value * cut.laplacian
        + 2.0 * grad_dot
}
