//! Energy functional, reduced expansion and concentration rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bubble::{bubble_constant, critical_exponent, nonlinear_power};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::numerics::{integrate_mc, integrate_radial, IntegralResult, QuadratureMethod, QuadratureSpec};
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConstants {
    pub dim: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a1_error: f64,
    pub a2_error: f64,
    pub a3_error: f64,
    pub fingerprint: String,
}

/// Radial profile of `U_{0,1}`.
pub fn bubble_profile(dim: usize, r: f64) -> f64 {
    bubble_constant(dim) * (1.0 + r * r).powf(-(dim as f64 - 2.0) / 2.0)
}

fn integrate_profile<F>(dim: usize, spec: &QuadratureSpec, g: F) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    match spec.method {
        QuadratureMethod::MonteCarlo => {
            let spec = if spec.importance_centers.is_empty() {
                spec.clone().with_centers(vec![vec![0.0; dim]], 1.0)
            } else {
                spec.clone()
            };
            integrate_mc(|y| g(y.iter().map(|v| v * v).sum::<f64>().sqrt()), dim, &spec)
        }
        _ => {
            let primary = integrate_radial(&g, dim, spec)?;
            let other = match spec.method {
                QuadratureMethod::RadialGauss => QuadratureSpec::tensor_gauss(spec.order_or_samples),
                _ => QuadratureSpec::radial_gauss(spec.order_or_samples),
            };
            let cross = integrate_radial(&g, dim, &other)?;
            Ok(IntegralResult {
                value: primary.value,
                error_estimate: primary.error_estimate.max((primary.value - cross.value).abs()),
                samples_used: primary.samples_used + cross.samples_used,
            })
        }
    }
}

/// `A₁ = (1/N)∫U^{2*}`, `A₂ = ½∫U²`, `A₃ = c_N ∫U^{2*-1}` for `U = U_{0,1}`.
pub fn compute_constants(dim: usize, spec: &QuadratureSpec) -> Result<ExpansionConstants> {
    if dim < 5 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let two_star = critical_exponent(dim);
    let p = nonlinear_power(dim);
    let i1 = integrate_profile(dim, spec, |r| bubble_profile(dim, r).powf(two_star))?;
    let i2 = integrate_profile(dim, spec, |r| bubble_profile(dim, r).powi(2))?;
    let i3 = integrate_profile(dim, spec, |r| bubble_profile(dim, r).powf(p))?;
    let c = bubble_constant(dim);
    let k1 = 0.5 - 1.0 / two_star;
    Ok(ExpansionConstants {
        dim,
        a1: k1 * i1.value,
        a2: 0.5 * i2.value,
        a3: c * i3.value,
        a1_error: k1 * i1.error_estimate,
        a2_error: 0.5 * i2.error_estimate,
        a3_error: c * i3.error_estimate,
        fingerprint: spec.fingerprint(),
    })
}

impl ExpansionConstants {
    /// One line per constant: `name N value error fingerprint`.
    pub fn to_cache_text(&self) -> String {
        let mut s = String::new();
        for (name, v, e) in [
            ("A1", self.a1, self.a1_error),
            ("A2", self.a2, self.a2_error),
            ("A3", self.a3, self.a3_error),
        ] {
            s.push_str(&format!("{name} {} {v:.17e} {e:.17e} {}\n", self.dim, self.fingerprint));
        }
        s
    }

    /// Entries for `dim` computed with `fingerprint`, if all three are present.
    pub fn from_cache_text(text: &str, dim: usize, fingerprint: &str) -> Result<Option<Self>> {
        let mut found = [None; 3];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = |message: &str| Error::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            if parts.len() != 5 {
                return Err(bad("expected `name N value error fingerprint`"));
            }
            let n: usize = parts[1].parse().map_err(|_| bad("bad dimension"))?;
            let value: f64 = parts[2].parse().map_err(|_| bad("bad value"))?;
            let error: f64 = parts[3].parse().map_err(|_| bad("bad error"))?;
            let slot = match parts[0] {
                "A1" => 0,
                "A2" => 1,
                "A3" => 2,
                _ => return Err(bad("unknown constant name")),
            };
            if n == dim && parts[4] == fingerprint {
                found[slot] = Some((value, error));
            }
        }
        Ok(match found {
            [Some(a1), Some(a2), Some(a3)] => Some(ExpansionConstants {
                dim,
                a1: a1.0,
                a2: a2.0,
                a3: a3.0,
                a1_error: a1.1,
                a2_error: a2.1,
                a3_error: a3.1,
                fingerprint: fingerprint.to_string(),
            }),
            _ => None,
        })
    }

    pub fn with_values(dim: usize, a1: f64, a2: f64, a3: f64) -> Self {
        ExpansionConstants {
            dim,
            a1,
            a2,
            a3,
            a1_error: 0.0,
            a2_error: 0.0,
            a3_error: 0.0,
            fingerprint: "given".into(),
        }
    }
}

/// `D_n(t) = Σ_{j=2}^{n} |p₁ - p_j|^{-(N-2)}` with `|p₁ - p_j| = 2t sin((j-1)π/n)`.
pub fn interaction_sum(n: usize, t: f64, dim: usize) -> f64 {
    let e = dim as f64 - 2.0;
    (1..n)
        .map(|j| (2.0 * t * (j as f64 * PI / n as f64).sin()).powf(-e))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedEnergyPoint {
    pub t: f64,
    pub tail: Vec<f64>,
    pub mu: f64,
    pub n: usize,
    pub value: f64,
    pub per_bubble_value: f64,
    /// `n A₁` when offsets are included, else 0.
    pub offset: f64,
}

fn reduced_at(p: &dyn Potential, t: f64, tail: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut x = Vec::with_capacity(1 + tail.len());
    x.push(t);
    x.extend_from_slice(tail);
    if x.len() != 1 + p.tail_len() {
        return Err(Error::DimensionMismatch {
            expected: 1 + p.tail_len(),
            got: x.len(),
        });
    }
    if let Some(nb) = p.neighborhood() {
        if !nb.contains(&x) {
            return Err(Error::OutsideNeighborhood);
        }
    }
    let v = p.value(&x);
    Ok((x, v))
}

/// `n (A₂V/μ² - A₃D_n(t)/μ^{N-2})`, plus `nA₁` when `include_offsets`.
pub fn reduced_energy(
    t: f64,
    tail: &[f64],
    mu: f64,
    n: usize,
    constants: &ExpansionConstants,
    potential: &dyn Potential,
    include_offsets: bool,
) -> Result<ReducedEnergyPoint> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter("μ must be positive".into()));
    }
    let dim = potential.dim();
    let (_, v) = reduced_at(potential, t, tail)?;
    let d = interaction_sum(n, t, dim);
    let per = constants.a2 * v / (mu * mu) - constants.a3 * d / mu.powi(dim as i32 - 2);
    let offset = if include_offsets { n as f64 * constants.a1 } else { 0.0 };
    Ok(ReducedEnergyPoint {
        t,
        tail: tail.to_vec(),
        mu,
        n,
        value: n as f64 * per + offset,
        per_bubble_value: per,
        offset,
    })
}

/// `μ* = [(N-2)A₃D / (2A₂V)]^{1/(N-4)}`.
pub fn critical_mu_closed_form(dim: usize, a2: f64, a3: f64, v: f64, d: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::NoCriticalScale);
    }
    let n = dim as f64;
    Ok(((n - 2.0) * a3 * d / (2.0 * a2 * v)).powf(1.0 / (n - 4.0)))
}

pub fn critical_mu(
    t: f64,
    tail: &[f64],
    n: usize,
    constants: &ExpansionConstants,
    potential: &dyn Potential,
) -> Result<f64> {
    let dim = potential.dim();
    let (_, v) = reduced_at(potential, t, tail)?;
    critical_mu_closed_form(dim, constants.a2, constants.a3, v, interaction_sum(n, t, dim))
}

/// `I(u) = ½∫(|∇u|² + Vu²) - (1/2*)∫|u|^{2*}` by importance-sampled Monte Carlo.
pub fn full_energy(u: &dyn Field, v: &dyn Field, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let dim = u.dim();
    if spec.method != QuadratureMethod::MonteCarlo {
        return Err(Error::InvalidQuadrature("full_energy integrates by Monte Carlo".into()));
    }
    let probe = vec![0.0; dim];
    if u.jet(&probe).is_none() {
        return Err(Error::MissingGradient);
    }
    let two_star = critical_exponent(dim);
    integrate_mc(
        |y| {
            let jet = match u.jet(y) {
                Some(j) => j,
                None => return f64::NAN,
            };
            let g2: f64 = jet.gradient.iter().map(|g| g * g).sum();
            if g2 == 0.0 && jet.value == 0.0 {
                return 0.0;
            }
            0.5 * (g2 + v.value(y) * jet.value * jet.value) - jet.value.abs().powf(two_star) / two_star
        },
        dim,
        spec,
    )
}
