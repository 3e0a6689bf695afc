//! Translation and dilation Pohozaev identities, corrected by the PDE
//! residuals so that they close for arbitrary smooth `u`, `η` and `V`.
//!
//! With `p = 2* - 1`, `R_u = -Δu + Vu - u^p` and
//! `R_η = -Δη + Vη - p u^{p-1} η`:
//!
//! translation (direction `i`):
//! `-∫∂_ν u ∂_i η - ∫∂_ν η ∂_i u + ∫⟨∇u,∇η⟩ν_i + ∫Vuην_i - ∫u^p η ν_i`
//! `= ∫ ∂_i V uη + ∫(R_u ∂_i η + R_η ∂_i u)`;
//!
//! dilation (center `x₀`, `w = y - x₀`):
//! `∫uη⟨∇V,w⟩ + 2∫Vuη = (boundary terms) + (2-N)/2 ∫(R_u η + R_η u)`
//! `- ∫(R_u⟨∇η,w⟩ + R_η⟨∇u,w⟩)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubble::{nonlinear_power, BubbleDScale, BubbleDy, BubbleParams};
use crate::error::{Error, Result};
use crate::field::{dot, finite_difference_jet, norm, ConstantField, Field, Gaussian, Jet};
use crate::numerics::{integrate_boundary_vec, integrate_volume_vec, Domain, QuadratureMethod, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Translation,
    Dilation,
}

impl Identity {
    pub fn as_str(self) -> &'static str {
        match self {
            Identity::Translation => "translation",
            Identity::Dilation => "dilation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    pub domain: String,
    pub dim: usize,
    pub order: usize,
    pub direction: Option<usize>,
    pub center: Option<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual_correction: f64,
    pub discrepancy: f64,
    pub relative_discrepancy: f64,
    /// Largest magnitude among the individual terms.
    pub term_scale: f64,
    /// `discrepancy / term_scale`, meaningful when both sides vanish.
    pub scaled_discrepancy: f64,
    pub terms: Vec<(String, f64)>,
}

impl IdentityCheck {
    fn new(
        identity: Identity,
        domain: &Domain,
        order: usize,
        lhs: f64,
        rhs: f64,
        residual_correction: f64,
        terms: Vec<(String, f64)>,
    ) -> Self {
        let discrepancy = (lhs - rhs - residual_correction).abs();
        let term_scale = terms.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
        IdentityCheck {
            identity,
            domain: domain.describe(),
            dim: domain.dim(),
            order,
            direction: None,
            center: None,
            lhs,
            rhs,
            residual_correction,
            discrepancy,
            relative_discrepancy: discrepancy / lhs.abs().max(rhs.abs()).max(1e-300),
            term_scale,
            scaled_discrepancy: if term_scale > 0.0 { discrepancy / term_scale } else { 0.0 },
            terms,
        }
    }
}

fn jet_of(f: &dyn Field, y: &[f64]) -> Jet {
    f.jet(y).unwrap_or_else(|| finite_difference_jet(f, y, 1e-4))
}

/// `u^e`, refusing negative bases unless `e` is an integer.
fn power(u: f64, e: f64) -> Result<f64> {
    if e.fract() == 0.0 {
        Ok(u.powi(e as i32))
    } else if u < 0.0 {
        Err(Error::NegativeBase)
    } else {
        Ok(u.powf(e))
    }
}

struct Local {
    u: Jet,
    eta: Jet,
    v: f64,
    grad_v: Vec<f64>,
    up: f64,
    r_u: f64,
    r_eta: f64,
}

fn local(u: &dyn Field, eta: &dyn Field, v: &dyn Field, y: &[f64], p: f64) -> Result<Local> {
    let ju = jet_of(u, y);
    let je = jet_of(eta, y);
    let jv = v.jet(y).ok_or(Error::MissingGradient)?;
    let up = power(ju.value, p)?;
    let up1 = power(ju.value, p - 1.0)?;
    let r_u = -ju.laplacian + jv.value * ju.value - up;
    let r_eta = -je.laplacian + jv.value * je.value - p * up1 * je.value;
    Ok(Local {
        u: ju,
        eta: je,
        v: jv.value,
        grad_v: jv.gradient,
        up,
        r_u,
        r_eta,
    })
}

fn order_of(spec: &QuadratureSpec) -> Result<usize> {
    spec.validate()?;
    match spec.method {
        QuadratureMethod::MonteCarlo => Err(Error::InvalidQuadrature(
            "identity checks use tensor Gauss rules".into(),
        )),
        _ => Ok(spec.order_or_samples),
    }
}

/// Runs a fallible pointwise accumulator through an infallible quadrature,
/// remembering the first error.
fn guarded<T>(run: impl FnOnce(&(dyn Fn(Result<()>) + Sync)) -> Result<T>) -> Result<T> {
    let failure = std::sync::Mutex::new(None);
    let out = run(&|r: Result<()>| {
        if let Err(e) = r {
            failure.lock().unwrap().get_or_insert(e);
        }
    })?;
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn volume(domain: &Domain, order: usize, outputs: usize, f: impl Fn(&[f64], &mut [f64], f64) -> Result<()> + Sync) -> Result<Vec<f64>> {
    guarded(|report| integrate_volume_vec(domain, order, outputs, |y, acc, w| report(f(y, acc, w))))
}

fn boundary(
    domain: &Domain,
    order: usize,
    outputs: usize,
    f: impl Fn(&[f64], &[f64], &mut [f64], f64) -> Result<()> + Sync,
) -> Result<Vec<f64>> {
    let mut total = vec![0.0; outputs];
    for piece in domain.boundary() {
        let part = guarded(|report| {
            integrate_boundary_vec(&piece, order, outputs, |sp, acc, w| report(f(sp.y, sp.normal, acc, w)))
        })?;
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    Ok(total)
}

fn check_dims(u: &dyn Field, eta: &dyn Field, v: &dyn Field, domain: &Domain) -> Result<usize> {
    let dim = domain.dim();
    for got in [u.dim(), eta.dim(), v.dim()] {
        if got != dim {
            return Err(Error::DimensionMismatch { expected: dim, got });
        }
    }
    if dim < 3 {
        return Err(Error::DimensionTooSmall(dim));
    }
    Ok(dim)
}

pub fn translation_identity_check(
    u: &dyn Field,
    eta: &dyn Field,
    v: &dyn Field,
    domain: &Domain,
    i: usize,
    spec: &QuadratureSpec,
) -> Result<IdentityCheck> {
    let dim = check_dims(u, eta, v, domain)?;
    if i >= dim {
        return Err(Error::InvalidParameter(format!("direction {i} out of range")));
    }
    let order = order_of(spec)?;
    let p = nonlinear_power(dim);
    let vol = volume(domain, order, 3, |y, acc, w| {
        let l = local(u, eta, v, y, p)?;
        acc[0] += w * l.grad_v[i] * l.u.value * l.eta.value;
        acc[1] += w * l.r_u * l.eta.gradient[i];
        acc[2] += w * l.r_eta * l.u.gradient[i];
        Ok(())
    })?;
    let bdy = boundary(domain, order, 5, |y, nu, acc, w| {
        let l = local(u, eta, v, y, p)?;
        acc[0] -= w * dot(&l.u.gradient, nu) * l.eta.gradient[i];
        acc[1] -= w * dot(&l.eta.gradient, nu) * l.u.gradient[i];
        acc[2] += w * dot(&l.u.gradient, &l.eta.gradient) * nu[i];
        acc[3] += w * l.v * l.u.value * l.eta.value * nu[i];
        acc[4] -= w * l.up * l.eta.value * nu[i];
        Ok(())
    })?;
    let names = [
        "-du/dn deta/dyi",
        "-deta/dn du/dyi",
        "grad u.grad eta n_i",
        "V u eta n_i",
        "-u^p eta n_i",
        "dV/dyi u eta",
        "R_u deta/dyi",
        "R_eta du/dyi",
    ];
    let values = bdy.iter().chain(&vol).copied();
    let terms = names.iter().map(|s| s.to_string()).zip(values).collect();
    let mut c = IdentityCheck::new(
        Identity::Translation,
        domain,
        order,
        bdy.iter().sum(),
        vol[0],
        vol[1] + vol[2],
        terms,
    );
    c.direction = Some(i);
    Ok(c)
}

pub fn dilation_identity_check(
    u: &dyn Field,
    eta: &dyn Field,
    v: &dyn Field,
    domain: &Domain,
    x0: &[f64],
    spec: &QuadratureSpec,
) -> Result<IdentityCheck> {
    let dim = check_dims(u, eta, v, domain)?;
    if x0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    let order = order_of(spec)?;
    let p = nonlinear_power(dim);
    let n = dim as f64;
    let offset = |y: &[f64]| -> Vec<f64> { y.iter().zip(x0).map(|(a, b)| a - b).collect() };
    let vol = volume(domain, order, 6, |y, acc, w| {
        let l = local(u, eta, v, y, p)?;
        let z = offset(y);
        acc[0] += w * l.u.value * l.eta.value * dot(&l.grad_v, &z);
        acc[1] += w * 2.0 * l.v * l.u.value * l.eta.value;
        acc[2] += w * l.r_u * dot(&l.eta.gradient, &z);
        acc[3] += w * l.r_eta * dot(&l.u.gradient, &z);
        acc[4] += w * l.r_u * l.eta.value;
        acc[5] += w * l.r_eta * l.u.value;
        Ok(())
    })?;
    let bdy = boundary(domain, order, 7, |y, nu, acc, w| {
        let l = local(u, eta, v, y, p)?;
        let z = offset(y);
        let nz = dot(nu, &z);
        let du_n = dot(&l.u.gradient, nu);
        let de_n = dot(&l.eta.gradient, nu);
        acc[0] -= w * l.up * l.eta.value * nz;
        acc[1] -= w * du_n * dot(&l.eta.gradient, &z);
        acc[2] -= w * de_n * dot(&l.u.gradient, &z);
        acc[3] += w * dot(&l.u.gradient, &l.eta.gradient) * nz;
        acc[4] += w * l.v * l.u.value * l.eta.value * nz;
        acc[5] += w * (2.0 - n) / 2.0 * l.eta.value * du_n;
        acc[6] += w * (2.0 - n) / 2.0 * l.u.value * de_n;
        Ok(())
    })?;
    let names = [
        "-u^p eta <n,w>",
        "-du/dn <grad eta,w>",
        "-deta/dn <grad u,w>",
        "grad u.grad eta <n,w>",
        "V u eta <n,w>",
        "(2-N)/2 eta du/dn",
        "(2-N)/2 u deta/dn",
        "u eta <grad V,w>",
        "2 V u eta",
        "R_u <grad eta,w>",
        "R_eta <grad u,w>",
        "R_u eta",
        "R_eta u",
    ];
    let values = bdy.iter().chain(&vol).copied();
    let terms = names.iter().map(|s| s.to_string()).zip(values).collect();
    let correction = (2.0 - n) / 2.0 * (vol[4] + vol[5]) - (vol[2] + vol[3]);
    let mut c = IdentityCheck::new(
        Identity::Dilation,
        domain,
        order,
        vol[0] + vol[1],
        bdy.iter().sum(),
        correction,
        terms,
    );
    c.center = Some(x0.to_vec());
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub orders: Vec<usize>,
    pub discrepancies: Vec<f64>,
    pub scaled_discrepancies: Vec<f64>,
    /// `log₂(d_k / d_{k+1})` for consecutive order doublings.
    pub observed_orders: Vec<f64>,
}

impl ConvergenceStudy {
    /// Smallest observed order among doublings whose finer discrepancy is
    /// still above `floor` (relative to the term scale).
    pub fn min_order_above(&self, floor: f64) -> Option<f64> {
        self.observed_orders
            .iter()
            .zip(&self.scaled_discrepancies[1..])
            .filter(|(_, d)| **d > floor)
            .map(|(o, _)| *o)
            .fold(None, |a: Option<f64>, o| Some(a.map_or(o, |a| a.min(o))))
    }
}

/// Repeat a check over orders `base·2^k`, k < `levels`.
pub fn convergence_study(
    base: usize,
    levels: usize,
    check: impl Fn(&QuadratureSpec) -> Result<IdentityCheck>,
) -> Result<ConvergenceStudy> {
    let orders: Vec<usize> = (0..levels).map(|k| base << k).collect();
    let checks = orders
        .iter()
        .map(|&o| check(&QuadratureSpec::tensor_gauss(o)))
        .collect::<Result<Vec<_>>>()?;
    let discrepancies: Vec<f64> = checks.iter().map(|c| c.discrepancy).collect();
    let observed_orders = discrepancies
        .windows(2)
        .map(|w| (w[0] / w[1].max(f64::MIN_POSITIVE)).log2())
        .collect();
    Ok(ConvergenceStudy {
        orders,
        scaled_discrepancies: checks.iter().map(|c| c.scaled_discrepancy).collect(),
        discrepancies,
        observed_orders,
    })
}

/// Translation identity on a box split into `splits` sub-boxes per axis,
/// summed term by term.
pub fn translation_identity_partitioned(
    u: &dyn Field,
    eta: &dyn Field,
    v: &dyn Field,
    lower: &[f64],
    upper: &[f64],
    splits: usize,
    i: usize,
    spec: &QuadratureSpec,
) -> Result<IdentityCheck> {
    let dim = lower.len();
    let cells = splits.pow(dim as u32);
    let parts = (0..cells)
        .into_par_iter()
        .map(|mut c| {
            let mut lo = vec![0.0; dim];
            let mut hi = vec![0.0; dim];
            for k in 0..dim {
                let j = c % splits;
                c /= splits;
                let h = (upper[k] - lower[k]) / splits as f64;
                lo[k] = lower[k] + j as f64 * h;
                hi[k] = lo[k] + h;
            }
            translation_identity_check(u, eta, v, &Domain::Box { lower: lo, upper: hi }, i, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let whole = Domain::Box {
        lower: lower.to_vec(),
        upper: upper.to_vec(),
    };
    let mut terms = parts[0].terms.clone();
    for part in &parts[1..] {
        for (t, (_, v)) in terms.iter_mut().zip(&part.terms) {
            t.1 += v;
        }
    }
    let mut c = IdentityCheck::new(
        Identity::Translation,
        &whole,
        parts[0].order,
        parts.iter().map(|p| p.lhs).sum(),
        parts.iter().map(|p| p.rhs).sum(),
        parts.iter().map(|p| p.residual_correction).sum(),
        terms,
    );
    c.direction = Some(i);
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBoundaryCheck {
    pub m: usize,
    pub samples: usize,
    pub max_normal_derivative: f64,
    pub max_gradient: f64,
    /// `max_normal_derivative / max_gradient` (0 when the gradient vanishes).
    pub relative: f64,
}

/// Sample `|⟨∇u, ν⟩|` on both flat faces `θ = ±π/m` of the sector: radii
/// `ρ_a = radius·a/per_axis` and remaining coordinates on a grid over
/// `[tail_lower, tail_upper]`, cycling through the grid so that `per_axis`
/// values per remaining coordinate are visited.
pub fn sector_boundary_check(
    u: &dyn Field,
    m: usize,
    radius: f64,
    tail_lower: &[f64],
    tail_upper: &[f64],
    per_axis: usize,
) -> Result<SectorBoundaryCheck> {
    let dim = 2 + tail_lower.len();
    if u.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: u.dim() });
    }
    if m < 2 || per_axis < 1 {
        return Err(Error::InvalidParameter("need m >= 2 and at least one sample".into()));
    }
    let k = per_axis;
    let at = |lo: f64, hi: f64, j: usize| lo + (hi - lo) * (j as f64 + 0.5) / k as f64;
    let mut points = Vec::new();
    for face in [crate::numerics::SectorFace::Plus, crate::numerics::SectorFace::Minus] {
        let angle = face.sign() * std::f64::consts::PI / m as f64;
        let normal = face.normal(m, dim);
        for a in 0..k {
            let rho = radius * (a as f64 + 1.0) / k as f64;
            for b in 0..k * k {
                let mut y = vec![rho * angle.cos(), rho * angle.sin()];
                for (d, (lo, hi)) in tail_lower.iter().zip(tail_upper).enumerate() {
                    y.push(at(*lo, *hi, (b / k.pow(d as u32 % 2) + d * a) % k));
                }
                points.push((y, normal.clone()));
            }
        }
    }
    let vals: Vec<(f64, f64)> = points
        .par_iter()
        .map(|(y, nu)| {
            let j = jet_of(u, y);
            (dot(&j.gradient, nu).abs(), norm(&j.gradient))
        })
        .collect();
    let max_n = vals.iter().fold(0.0f64, |a, v| a.max(v.0));
    let max_g = vals.iter().fold(0.0f64, |a, v| a.max(v.1));
    Ok(SectorBoundaryCheck {
        m,
        samples: points.len(),
        max_normal_derivative: max_n,
        max_gradient: max_g,
        relative: if max_g > 0.0 { max_n / max_g } else { 0.0 },
    })
}

/// Built-in identity checks exposed to the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `u = e^{-|y|²}`, `η = e^{-2|y|²}`, `V ≡ 1` on the unit ball of ℝ³.
    GaussianBall3d,
    /// `U_{0,1}` with `∂U/∂y₁` and `∂U/∂λ`, `V ≡ 0` on the ball of radius 2 in ℝ⁵.
    BubbleBall5d,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian-ball-3d" => Some(Preset::GaussianBall3d),
            "bubble-ball-5d" => Some(Preset::BubbleBall5d),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::GaussianBall3d => "gaussian-ball-3d",
            Preset::BubbleBall5d => "bubble-ball-5d",
        }
    }

    pub fn default_order(self) -> usize {
        match self {
            Preset::GaussianBall3d => 40,
            Preset::BubbleBall5d => 16,
        }
    }

    /// Translation along y₁ and dilation about the preset's center.
    pub fn run(self, spec: &QuadratureSpec) -> Result<Vec<IdentityCheck>> {
        match self {
            Preset::GaussianBall3d => {
                let u = Gaussian::centered(3, 1.0);
                let eta = Gaussian::centered(3, 2.0);
                let v = ConstantField { dim: 3, value: 1.0 };
                let ball = Domain::ball(3, 1.0);
                Ok(vec![
                    translation_identity_check(&u, &eta, &v, &ball, 0, spec)?,
                    dilation_identity_check(&u, &eta, &v, &ball, &[0.3, 0.0, 0.0], spec)?,
                ])
            }
            Preset::BubbleBall5d => {
                let b = BubbleParams::new(vec![0.0; 5], 1.0)?;
                let dy = BubbleDy {
                    bubble: b.clone(),
                    axis: 0,
                };
                let dl = BubbleDScale { bubble: b.clone() };
                let v = ConstantField { dim: 5, value: 0.0 };
                let ball = Domain::ball(5, 2.0);
                Ok(vec![
                    translation_identity_check(&b, &dy, &v, &ball, 0, spec)?,
                    dilation_identity_check(&b, &dl, &v, &ball, &[0.0; 5], spec)?,
                ])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{symmetrize, Ansatz, AnsatzPart, CutoffSpec, TowerConfig};
    use crate::field::{FnField, JetField};

    fn gaussians() -> (Gaussian, Gaussian, ConstantField) {
        (Gaussian::centered(3, 1.0), Gaussian::centered(3, 2.0), ConstantField { dim: 3, value: 1.0 })
    }

    #[test]
    fn zero_fields_give_zero() {
        let z = ConstantField { dim: 3, value: 0.0 };
        let ball = Domain::ball(3, 1.0);
        let spec = QuadratureSpec::tensor_gauss(8);
        let t = translation_identity_check(&z, &z, &z, &ball, 0, &spec).unwrap();
        assert_eq!((t.lhs, t.rhs, t.discrepancy), (0.0, 0.0, 0.0));
        let d = dilation_identity_check(&z, &z, &z, &ball, &[0.1, 0.0, 0.0], &spec).unwrap();
        assert!(d.terms.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn gaussian_pair_translation_closes() {
        let (u, eta, v) = gaussians();
        let ball = Domain::ball(3, 1.0);
        let c = translation_identity_check(&u, &eta, &v, &ball, 0, &QuadratureSpec::tensor_gauss(40)).unwrap();
        // Every term is odd in y₁, so both sides vanish up to rounding.
        assert!(c.term_scale < 1e-14, "{c:?}");
        assert!(c.discrepancy < 1e-14);
    }

    #[test]
    fn gaussian_pair_off_center_translation_closes() {
        // Shifted so that neither side vanishes by symmetry.
        let mut u = Gaussian::centered(3, 1.0);
        u.center = vec![0.3, -0.2, 0.1];
        let eta = Gaussian::centered(3, 2.0);
        let v = FnField::new(3, |y: &[f64]| 1.0 + 0.5 * y[0]);
        let v = JetField::new(3, move |y: &[f64]| Jet {
            value: v.value(y),
            gradient: vec![0.5, 0.0, 0.0],
            laplacian: 0.0,
        });
        let ball = Domain::ball(3, 1.0);
        let c = translation_identity_check(&u, &eta, &v, &ball, 0, &QuadratureSpec::tensor_gauss(40)).unwrap();
        assert!(c.lhs.abs() > 1e-2);
        assert!(c.relative_discrepancy < 1e-6, "{c:?}");
    }

    #[test]
    fn gaussian_pair_dilation_closes_and_converges() {
        let (u, eta, v) = gaussians();
        let ball = Domain::ball(3, 1.0);
        let x0 = [0.3, 0.0, 0.0];
        let c = dilation_identity_check(&u, &eta, &v, &ball, &x0, &QuadratureSpec::tensor_gauss(40)).unwrap();
        assert!(c.relative_discrepancy < 1e-6, "{c:?}");
        let study = convergence_study(2, 4, |s| dilation_identity_check(&u, &eta, &v, &ball, &x0, s)).unwrap();
        for w in study.discrepancies.windows(2) {
            assert!(w[1] <= w[0] || w[1] < 1e-13 * c.term_scale);
        }
        let observed = study.min_order_above(1e-13).unwrap();
        assert!(observed >= 4.0, "{study:?}");
    }

    #[test]
    fn exact_bubble_pairs_close() {
        let spec = QuadratureSpec::tensor_gauss(16);
        for c in Preset::BubbleBall5d.run(&spec).unwrap() {
            assert!(c.scaled_discrepancy < 1e-6, "{c:?}");
            assert!(c.residual_correction.abs() < 1e-8 * c.term_scale);
        }
    }

    #[test]
    fn off_center_exact_bubble_pair_closes() {
        let b = BubbleParams::new(vec![0.2, -0.1, 0.0, 0.3, 0.0], 1.5).unwrap();
        let dy = BubbleDy {
            bubble: b.clone(),
            axis: 1,
        };
        let v = ConstantField { dim: 5, value: 0.0 };
        let ball = Domain::ball(5, 2.0);
        let c = translation_identity_check(&b, &dy, &v, &ball, 1, &QuadratureSpec::tensor_gauss(16)).unwrap();
        assert!(c.scaled_discrepancy < 1e-6, "{c:?}");
    }

    #[test]
    fn sector_domain_identity_closes() {
        let (mut u, eta, v) = gaussians();
        u.center = vec![0.4, 0.1, 0.2];
        let sector = Domain::Sector {
            m: 6,
            radius: 1.0,
            tail_lower: vec![-0.5],
            tail_upper: vec![0.7],
        };
        let spec = QuadratureSpec::tensor_gauss(24);
        let t = translation_identity_check(&u, &eta, &v, &sector, 1, &spec).unwrap();
        assert!(t.term_scale > 1e-3);
        assert!(t.scaled_discrepancy < 1e-10, "{t:?}");
        let d = dilation_identity_check(&u, &eta, &v, &sector, &[0.2, 0.1, 0.0], &spec).unwrap();
        assert!(d.scaled_discrepancy < 1e-10, "{d:?}");
    }

    #[test]
    fn partition_is_additive() {
        let (u, eta, v) = gaussians();
        let spec = QuadratureSpec::tensor_gauss(12);
        let (lo, hi) = ([-0.6, -0.4, -0.5], [0.7, 0.5, 0.4]);
        let whole = translation_identity_check(&u, &eta, &v, &Domain::Box { lower: lo.to_vec(), upper: hi.to_vec() }, 2, &spec)
            .unwrap();
        let split = translation_identity_partitioned(&u, &eta, &v, &lo, &hi, 2, 2, &spec).unwrap();
        assert!((whole.lhs - split.lhs).abs() < 1e-8 * whole.term_scale);
        assert!((whole.rhs - split.rhs).abs() < 1e-8 * whole.term_scale);
        assert!((whole.residual_correction - split.residual_correction).abs() < 1e-8 * whole.term_scale);
    }

    #[test]
    fn gradient_terms_are_symmetric_under_swap() {
        let mut u = Gaussian::centered(3, 1.0);
        u.center = vec![0.1, 0.2, 0.0];
        let eta = Gaussian::centered(3, 2.0);
        let v = ConstantField { dim: 3, value: 1.0 };
        let ball = Domain::ball(3, 1.0);
        let spec = QuadratureSpec::tensor_gauss(20);
        let a = translation_identity_check(&u, &eta, &v, &ball, 0, &spec).unwrap();
        let b = translation_identity_check(&eta, &u, &v, &ball, 0, &spec).unwrap();
        let sym = |c: &IdentityCheck| c.terms[..4].iter().map(|t| t.1).sum::<f64>();
        assert!((sym(&a) - sym(&b)).abs() < 1e-12 * a.term_scale);
    }

    #[test]
    fn negative_base_is_refused() {
        // N = 5 has a fractional power.
        let u = ConstantField { dim: 5, value: -1.0 };
        let v = ConstantField { dim: 5, value: 0.0 };
        let err = translation_identity_check(&u, &u, &v, &Domain::ball(5, 1.0), 0, &QuadratureSpec::tensor_gauss(4));
        assert_eq!(err.unwrap_err(), Error::NegativeBase);
        // N = 3 has an integer power.
        let u = ConstantField { dim: 3, value: -1.0 };
        let v = ConstantField { dim: 3, value: 0.0 };
        assert!(translation_identity_check(&u, &u, &v, &Domain::ball(3, 1.0), 0, &QuadratureSpec::tensor_gauss(4)).is_ok());
    }

    #[test]
    fn gaussian_preset_meets_its_target() {
        let spec = QuadratureSpec::tensor_gauss(Preset::GaussianBall3d.default_order());
        let checks = Preset::GaussianBall3d.run(&spec).unwrap();
        for c in &checks {
            assert!(c.discrepancy < 1e-6, "{c:?}");
        }
        assert!(checks[1].relative_discrepancy < 1e-6);
    }

    fn tower7() -> TowerConfig {
        let r0 = (1.0f64 / 22.0).sqrt();
        let tail = vec![2.0 * r0; 3];
        TowerConfig {
            m: 8,
            r_bar: r0,
            lambda: 30.0,
            n: 8,
            t: r0,
            mu: 40.0,
            tail: tail.clone(),
            cutoff: CutoffSpec::new(r0, tail, r0 / 4.0).unwrap(),
            n_phase: 0.0,
        }
    }

    #[test]
    fn symmetrized_ring_has_no_normal_derivative_on_faces() {
        let cfg = tower7();
        let r0 = cfg.r_bar;
        let u = symmetrize(Ansatz::new(&cfg, AnsatzPart::MRing), 8);
        let lo: Vec<f64> = vec![-0.05, -0.05, 2.0 * r0 - 0.05, 2.0 * r0 - 0.05, 2.0 * r0 - 0.05];
        let hi: Vec<f64> = lo.iter().map(|v| v + 0.1).collect();
        let c = sector_boundary_check(&u, 8, 1.5 * r0, &lo, &hi, 6).unwrap();
        assert!(c.max_gradient > 0.0);
        assert!(c.relative < 1e-8, "{c:?}");
    }

    #[test]
    fn off_axis_bubble_has_normal_derivative() {
        let b = BubbleParams::new(vec![0.3, 0.05, 0.0, 0.0, 0.0], 4.0).unwrap();
        let c = sector_boundary_check(&b, 8, 0.6, &[-0.1; 3], &[0.1; 3], 4).unwrap();
        assert!(c.max_normal_derivative > 0.0 && c.relative > 1e-3);
    }

    #[test]
    fn constant_field_has_zero_normal_derivative() {
        let c = sector_boundary_check(&ConstantField { dim: 4, value: 2.0 }, 6, 1.0, &[0.0; 2], &[1.0; 2], 3).unwrap();
        assert_eq!(c.max_normal_derivative, 0.0);
    }
}
