//! Tensor-product Gauss rules on bounded domains and their boundaries.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GaussLegendre, IntegralResult, QuadratureMethod, QuadratureSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Domain {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// Truncated fundamental sector Ω₁ of an m-gon in the (y₁, y₂)-plane:
    /// polar angle in [-π/m, π/m], |(y₁, y₂)| ≤ radius, remaining
    /// coordinates in the box [tail_lower, tail_upper].
    Sector {
        m: usize,
        radius: f64,
        tail_lower: Vec<f64>,
        tail_upper: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorFace {
    /// θ = +π/m, outward normal (-sin(π/m), cos(π/m), 0, ...).
    Plus,
    /// θ = -π/m, outward normal (-sin(π/m), -cos(π/m), 0, ...).
    Minus,
}

impl SectorFace {
    pub fn sign(self) -> f64 {
        match self {
            SectorFace::Plus => 1.0,
            SectorFace::Minus => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SectorFace::Plus => "plus",
            SectorFace::Minus => "minus",
        }
    }

    /// Outward unit normal of Ω₁ on this face, embedded in ℝ^dim.
    pub fn normal(self, m: usize, dim: usize) -> Vec<f64> {
        let a = PI / m as f64;
        let mut nu = vec![0.0; dim];
        nu[0] = -a.sin();
        nu[1] = self.sign() * a.cos();
        nu
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Boundary {
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    BoxSurface {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    SectorFace {
        m: usize,
        face: SectorFace,
        radius: f64,
        tail_lower: Vec<f64>,
        tail_upper: Vec<f64>,
    },
    /// Outer cylinder and tail faces of a truncated sector.
    SectorRemainder {
        m: usize,
        radius: f64,
        tail_lower: Vec<f64>,
        tail_upper: Vec<f64>,
    },
}

impl Boundary {
    pub fn parse_kind(kind: &str) -> Result<&'static str> {
        match kind {
            "ball" | "sphere" => Ok("ball"),
            "box" => Ok("box"),
            "sector_face" => Ok("sector_face"),
            other => Err(Error::UnsupportedBoundary(other.to_string())),
        }
    }
}

/// A boundary node handed to surface integrands.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint<'a> {
    pub y: &'a [f64],
    /// Outward unit normal.
    pub normal: &'a [f64],
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lower, .. } => lower.len(),
            Domain::Sector { tail_lower, .. } => tail_lower.len() + 2,
        }
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        Domain::Ball {
            center: vec![0.0; dim],
            radius,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Ball { radius, .. } => format!("ball(R={radius})"),
            Domain::Box { lower, upper } => format!("box({lower:?},{upper:?})"),
            Domain::Sector { m, radius, .. } => format!("sector(m={m},R={radius})"),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Domain::Ball { center, radius } => !center.is_empty() && *radius > 0.0,
            Domain::Box { lower, upper } => {
                !lower.is_empty()
                    && lower.len() == upper.len()
                    && lower.iter().zip(upper).all(|(a, b)| a < b)
            }
            Domain::Sector {
                m,
                radius,
                tail_lower,
                tail_upper,
            } => {
                *m >= 2
                    && *radius > 0.0
                    && tail_lower.len() == tail_upper.len()
                    && tail_lower.iter().zip(tail_upper).all(|(a, b)| a < b)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid domain {}", self.describe())))
        }
    }

    /// All boundary pieces; their union is ∂Ω.
    pub fn boundary(&self) -> Vec<Boundary> {
        match self {
            Domain::Ball { center, radius } => vec![Boundary::Sphere {
                center: center.clone(),
                radius: *radius,
            }],
            Domain::Box { lower, upper } => vec![Boundary::BoxSurface {
                lower: lower.clone(),
                upper: upper.clone(),
            }],
            Domain::Sector {
                m,
                radius,
                tail_lower,
                tail_upper,
            } => [SectorFace::Plus, SectorFace::Minus]
                .into_iter()
                .map(|face| Boundary::SectorFace {
                    m: *m,
                    face,
                    radius: *radius,
                    tail_lower: tail_lower.clone(),
                    tail_upper: tail_upper.clone(),
                })
                .chain(std::iter::once(Boundary::SectorRemainder {
                    m: *m,
                    radius: *radius,
                    tail_lower: tail_lower.clone(),
                    tail_upper: tail_upper.clone(),
                }))
                .collect(),
        }
    }
}

/// Sum `w · f(params)` over the tensor grid, accumulating `outputs` values.
/// Parallel over the first axis; partial sums are combined in index order.
fn tensor_sum<F>(axes: &[Vec<(f64, f64)>], outputs: usize, f: F) -> Vec<f64>
where
    F: Fn(&[f64], f64, &mut [f64]) + Sync,
{
    if axes.is_empty() {
        let mut acc = vec![0.0; outputs];
        f(&[], 1.0, &mut acc);
        return acc;
    }
    let rest = &axes[1..];
    let partials: Vec<Vec<f64>> = axes[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut acc = vec![0.0; outputs];
            let mut params = vec![0.0; axes.len()];
            params[0] = x0;
            let mut idx = vec![0usize; rest.len()];
            loop {
                let mut w = w0;
                for (k, &i) in idx.iter().enumerate() {
                    let (x, wk) = rest[k][i];
                    params[k + 1] = x;
                    w *= wk;
                }
                f(&params, w, &mut acc);
                // odometer
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        return acc;
                    }
                    idx[k] += 1;
                    if idx[k] < rest[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        })
        .collect();
    let mut total = vec![0.0; outputs];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

fn axis(rule: &GaussLegendre, a: f64, b: f64) -> Vec<(f64, f64)> {
    rule.on_interval(a, b).collect()
}

/// Hyperspherical angles: N-2 polar angles in [0, π] and one azimuth.
fn sphere_axes(rule: &GaussLegendre, dim: usize) -> Vec<Vec<(f64, f64)>> {
    let mut axes = Vec::with_capacity(dim - 1);
    for _ in 0..dim.saturating_sub(2) {
        axes.push(axis(rule, 0.0, PI));
    }
    axes.push(axis(rule, 0.0, 2.0 * PI));
    axes
}

/// Unit vector and area element of the hyperspherical parameterization,
/// polar axis along y₁.
fn sphere_point(angles: &[f64], out: &mut [f64]) -> f64 {
    let dim = out.len();
    let mut sin_prod = 1.0;
    let mut jac = 1.0;
    for k in 0..dim - 1 {
        let (s, c) = angles[k].sin_cos();
        out[k] = sin_prod * c;
        if k < dim - 2 {
            jac *= s.powi((dim - 2 - k) as i32);
        }
        sin_prod *= s;
    }
    out[dim - 1] = sin_prod;
    jac
}

/// Sum `w · f(y)` over a tensor Gauss rule on `domain` (vector-valued).
pub fn integrate_volume_vec<F>(domain: &Domain, order: usize, outputs: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64], f64) + Sync,
{
    domain.validate()?;
    let rule = GaussLegendre::new(order);
    let dim = domain.dim();
    Ok(match domain {
        Domain::Ball { center, radius } => {
            if dim == 1 {
                let axes = vec![axis(&rule, center[0] - radius, center[0] + radius)];
                return Ok(tensor_sum(&axes, outputs, |p, w, acc| f(&[p[0]], acc, w)));
            }
            let mut axes = vec![axis(&rule, 0.0, *radius)];
            axes.extend(sphere_axes(&rule, dim));
            tensor_sum(&axes, outputs, |p, w, acc| {
                let mut y = vec![0.0; dim];
                let jac = sphere_point(&p[1..], &mut y);
                let r = p[0];
                for (yi, c) in y.iter_mut().zip(center) {
                    *yi = c + r * *yi;
                }
                f(&y, acc, w * jac * r.powi(dim as i32 - 1));
            })
        }
        Domain::Box { lower, upper } => {
            let axes: Vec<_> = lower.iter().zip(upper).map(|(a, b)| axis(&rule, *a, *b)).collect();
            tensor_sum(&axes, outputs, |p, w, acc| f(p, acc, w))
        }
        Domain::Sector {
            m,
            radius,
            tail_lower,
            tail_upper,
        } => {
            let a = PI / *m as f64;
            let mut axes = vec![axis(&rule, 0.0, *radius), axis(&rule, -a, a)];
            axes.extend(tail_lower.iter().zip(tail_upper).map(|(l, u)| axis(&rule, *l, *u)));
            tensor_sum(&axes, outputs, |p, w, acc| {
                let mut y = Vec::with_capacity(dim);
                let (s, c) = p[1].sin_cos();
                y.push(p[0] * c);
                y.push(p[0] * s);
                y.extend_from_slice(&p[2..]);
                f(&y, acc, w * p[0]);
            })
        }
    })
}

/// Sum `w · f(point)` over a tensor Gauss rule on one boundary piece.
pub fn integrate_boundary_vec<F>(boundary: &Boundary, order: usize, outputs: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&SurfacePoint, &mut [f64], f64) + Sync,
{
    let rule = GaussLegendre::new(order);
    match boundary {
        Boundary::Sphere { center, radius } => {
            let dim = center.len();
            if dim < 2 || *radius <= 0.0 {
                return Err(Error::UnsupportedBoundary(format!("sphere in dimension {dim}")));
            }
            let axes = sphere_axes(&rule, dim);
            let scale = radius.powi(dim as i32 - 1);
            Ok(tensor_sum(&axes, outputs, |p, w, acc| {
                let mut nu = vec![0.0; dim];
                let jac = sphere_point(p, &mut nu);
                let y: Vec<f64> = nu.iter().zip(center).map(|(n, c)| c + radius * n).collect();
                f(&SurfacePoint { y: &y, normal: &nu }, acc, w * jac * scale);
            }))
        }
        Boundary::BoxSurface { lower, upper } => {
            let dim = lower.len();
            if dim < 1 || upper.len() != dim || lower.iter().zip(upper).any(|(a, b)| a >= b) {
                return Err(Error::UnsupportedBoundary("degenerate box".into()));
            }
            let mut total = vec![0.0; outputs];
            for k in 0..dim {
                for (side, sign) in [(lower[k], -1.0), (upper[k], 1.0)] {
                    let axes: Vec<_> = (0..dim)
                        .filter(|&i| i != k)
                        .map(|i| axis(&rule, lower[i], upper[i]))
                        .collect();
                    let mut nu = vec![0.0; dim];
                    nu[k] = sign;
                    let part = tensor_sum(&axes, outputs, |p, w, acc| {
                        let mut y = Vec::with_capacity(dim);
                        y.extend_from_slice(&p[..k]);
                        y.push(side);
                        y.extend_from_slice(&p[k..]);
                        f(&SurfacePoint { y: &y, normal: &nu }, acc, w);
                    });
                    for (t, v) in total.iter_mut().zip(part) {
                        *t += v;
                    }
                }
            }
            Ok(total)
        }
        Boundary::SectorFace {
            m,
            face,
            radius,
            tail_lower,
            tail_upper,
        } => {
            if *m < 2 || *radius <= 0.0 || tail_lower.len() != tail_upper.len() {
                return Err(Error::UnsupportedBoundary(format!("sector face with m = {m}")));
            }
            let dim = tail_lower.len() + 2;
            let a = PI / *m as f64;
            let angle = face.sign() * a;
            let (s, c) = angle.sin_cos();
            let nu = face.normal(*m, dim);
            let mut axes = vec![axis(&rule, 0.0, *radius)];
            axes.extend(tail_lower.iter().zip(tail_upper).map(|(l, u)| axis(&rule, *l, *u)));
            Ok(tensor_sum(&axes, outputs, |p, w, acc| {
                let mut y = Vec::with_capacity(dim);
                y.push(p[0] * c);
                y.push(p[0] * s);
                y.extend_from_slice(&p[1..]);
                f(&SurfacePoint { y: &y, normal: &nu }, acc, w);
            }))
        }
        Boundary::SectorRemainder {
            m,
            radius,
            tail_lower,
            tail_upper,
        } => {
            if *m < 2 || *radius <= 0.0 || tail_lower.len() != tail_upper.len() {
                return Err(Error::UnsupportedBoundary(format!("sector remainder with m = {m}")));
            }
            sector_remainder(&rule, *m, *radius, tail_lower, tail_upper, outputs, &f)
        }
    }
}

/// Outer cylinder and tail faces of a truncated sector.
fn sector_remainder<F>(
    rule: &GaussLegendre,
    m: usize,
    radius: f64,
    tail_lower: &[f64],
    tail_upper: &[f64],
    outputs: usize,
    f: &F,
) -> Result<Vec<f64>>
where
    F: Fn(&SurfacePoint, &mut [f64], f64) + Sync,
{
    let dim = tail_lower.len() + 2;
    let a = PI / m as f64;
    let tails: Vec<_> = tail_lower
        .iter()
        .zip(tail_upper)
        .map(|(l, u)| axis(rule, *l, *u))
        .collect();
    let mut axes = vec![axis(rule, -a, a)];
    axes.extend(tails.iter().cloned());
    let mut total = tensor_sum(&axes, outputs, |p, w, acc| {
        let (s, c) = p[0].sin_cos();
        let mut y = vec![radius * c, radius * s];
        y.extend_from_slice(&p[1..]);
        let mut nu = vec![0.0; dim];
        nu[0] = c;
        nu[1] = s;
        f(&SurfacePoint { y: &y, normal: &nu }, acc, w * radius);
    });
    for k in 0..tail_lower.len() {
        for (side, sign) in [(tail_lower[k], -1.0), (tail_upper[k], 1.0)] {
            let mut axes = vec![axis(rule, 0.0, radius), axis(rule, -a, a)];
            axes.extend(tails.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, t)| t.clone()));
            let mut nu = vec![0.0; dim];
            nu[k + 2] = sign;
            let part = tensor_sum(&axes, outputs, |p, w, acc| {
                let (s, c) = p[1].sin_cos();
                let mut y = vec![p[0] * c, p[0] * s];
                y.extend_from_slice(&p[2..2 + k]);
                y.push(side);
                y.extend_from_slice(&p[2 + k..]);
                f(&SurfacePoint { y: &y, normal: &nu }, acc, w * p[0]);
            });
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
    }
    Ok(total)
}

fn tensor_order(spec: &QuadratureSpec) -> Result<usize> {
    spec.validate()?;
    match spec.method {
        QuadratureMethod::MonteCarlo => Err(Error::InvalidQuadrature(
            "domain integration needs a Gauss method".into(),
        )),
        _ => Ok(spec.order_or_samples),
    }
}

/// `∫_Ω f` by tensor Gauss at the spec's order, error by order doubling.
pub fn integrate_volume<F>(f: F, domain: &Domain, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let order = tensor_order(spec)?;
    let run = |k: usize| integrate_volume_vec(domain, k, 1, |y, acc, w| acc[0] += w * f(y));
    let coarse = run(order)?[0];
    let fine = run(2 * order)?[0];
    finish(coarse, fine, order, domain.dim())
}

/// `∫_Γ f` over one boundary piece; the integrand sees the outward normal.
pub fn surface_integrate<F>(f: F, boundary: &Boundary, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&SurfacePoint) -> f64 + Sync,
{
    let order = tensor_order(spec)?;
    let run = |k: usize| integrate_boundary_vec(boundary, k, 1, |p, acc, w| acc[0] += w * f(p));
    let coarse = run(order)?[0];
    let fine = run(2 * order)?[0];
    let dim = match boundary {
        Boundary::Sphere { center, .. } => center.len(),
        Boundary::BoxSurface { lower, .. } => lower.len(),
        Boundary::SectorFace { tail_lower, .. } | Boundary::SectorRemainder { tail_lower, .. } => {
            tail_lower.len() + 2
        }
    };
    finish(coarse, fine, order, dim.saturating_sub(1))
}

fn finish(coarse: f64, fine: f64, order: usize, axes: usize) -> Result<IntegralResult> {
    if !fine.is_finite() {
        return Err(Error::NonFiniteIntegrand);
    }
    Ok(IntegralResult {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        samples_used: order.pow(axes as u32) + (2 * order).pow(axes as u32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sphere_area() {
        let b = Boundary::Sphere {
            center: vec![0.0; 3],
            radius: 1.0,
        };
        let r = surface_integrate(|_| 1.0, &b, &QuadratureSpec::tensor_gauss(12)).unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn normal_component_integrates_to_zero() {
        let b = Boundary::Sphere {
            center: vec![0.0; 3],
            radius: 1.0,
        };
        let r = surface_integrate(|p| p.normal[0], &b, &QuadratureSpec::tensor_gauss(12)).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn second_moment_on_sphere() {
        let b = Boundary::Sphere {
            center: vec![0.0; 3],
            radius: 1.0,
        };
        let r = surface_integrate(|p| p.y[0] * p.y[0], &b, &QuadratureSpec::tensor_gauss(12)).unwrap();
        assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        for dim in [2, 3, 5] {
            let r = integrate_volume(|_| 1.0, &Domain::ball(dim, 2.0), &QuadratureSpec::tensor_gauss(6)).unwrap();
            let exact = super::super::ball_volume(dim) * 2f64.powi(dim as i32);
            assert!((r.value - exact).abs() < 1e-10 * exact, "dim {dim}: {}", r.value);
        }
    }

    #[test]
    fn divergence_theorem_on_box_and_sector() {
        // ∫_Ω ∂₁F = ∫_∂Ω F ν₁ with F = y₁² y₂ + y₃.
        let field = |y: &[f64]| y[0] * y[0] * y[1] + y[2];
        let div = |y: &[f64]| 2.0 * y[0] * y[1];
        let domains = [
            Domain::Box {
                lower: vec![-0.3, 0.1, -1.0],
                upper: vec![0.7, 0.9, 0.5],
            },
            Domain::Sector {
                m: 6,
                radius: 1.3,
                tail_lower: vec![-0.4],
                tail_upper: vec![0.8],
            },
        ];
        for d in &domains {
            let vol = integrate_volume_vec(d, 10, 1, |y, acc, w| acc[0] += w * div(y)).unwrap()[0];
            let mut surf = 0.0;
            for piece in d.boundary() {
                surf += integrate_boundary_vec(&piece, 10, 1, |p, acc, w| acc[0] += w * field(p.y) * p.normal[0]).unwrap()[0];
            }
            assert!((vol - surf).abs() < 1e-12, "{}: {vol} vs {surf}", d.describe());
        }
    }

    #[test]
    fn sector_face_normals() {
        let m = 8;
        let plus = SectorFace::Plus.normal(m, 4);
        let minus = SectorFace::Minus.normal(m, 4);
        let a = PI / m as f64;
        // Plus normal is orthogonal to the face direction (cos a, sin a).
        assert!((plus[0] * a.cos() + plus[1] * a.sin()).abs() < 1e-15);
        assert!((minus[0] * a.cos() - minus[1] * a.sin()).abs() < 1e-15);
        // Both point away from the sector axis (1, 0).
        assert!(plus[0] < 0.0 && minus[0] < 0.0);
    }

    #[test]
    fn unsupported_boundaries() {
        assert!(matches!(Boundary::parse_kind("torus"), Err(Error::UnsupportedBoundary(_))));
        let b = Boundary::SectorFace {
            m: 1,
            face: SectorFace::Plus,
            radius: 1.0,
            tail_lower: vec![],
            tail_upper: vec![],
        };
        assert!(surface_integrate(|_| 1.0, &b, &QuadratureSpec::tensor_gauss(4)).is_err());
    }
}
