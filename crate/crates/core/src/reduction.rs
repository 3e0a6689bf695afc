//! Critical points of the reduced energy and the two decay studies.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::bubble::{
    eval_residual_ln, structured_cloud, weighted_norm, Ansatz, AnsatzPart, CloudSpec, NormKind, TowerConfig,
    WeightedNormKind,
};
use crate::energy::{critical_mu, ExpansionConstants};
use crate::error::{Error, Result};
use crate::field::{ConstantField, Field};
use crate::potential::{local_derivatives, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Min,
    Max,
    Saddle,
    Degenerate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Min => "min",
            Classification::Max => "max",
            Classification::Saddle => "saddle",
            Classification::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointResult {
    pub t: f64,
    pub tail: Vec<f64>,
    pub mu: f64,
    pub gradient_norm: f64,
    pub classification: Classification,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Half-width ϑ of the search ball around the audited critical point.
    pub theta: f64,
    /// Convergence test on `|∇ log g|`.
    pub tol: f64,
    pub max_steps: usize,
}

impl SearchOptions {
    /// ϑ = 0.1 r₀.
    pub fn around(r0: f64) -> Self {
        SearchOptions {
            theta: 0.1 * r0,
            tol: 1e-11,
            max_steps: 50,
        }
    }
}

/// The reduced energy per bubble with `μ` eliminated:
/// `g(t, ỹ*) = (N-4)/(N-2) · A₂ V / μ*²`.
pub fn profile_value(x: &[f64], n: usize, constants: &ExpansionConstants, p: &dyn Potential) -> Result<f64> {
    let mu = critical_mu(x[0], &x[1..], n, constants, p)?;
    let dim = p.dim() as f64;
    Ok((dim - 4.0) / (dim - 2.0) * constants.a2 * p.value(x) / (mu * mu))
}

/// `∇ log g = (N-2)/(N-4) (∇V/V + 2 e_t / t)`, since `D_n(t) ∝ t^{-(N-2)}`.
fn log_gradient(p: &dyn Potential, x: &[f64]) -> Vec<f64> {
    let d = local_derivatives(p, x);
    let dim = p.dim() as f64;
    let k = (dim - 2.0) / (dim - 4.0);
    let mut g: Vec<f64> = d.grad.iter().map(|v| k * v / d.v).collect();
    g[0] += k * 2.0 / x[0];
    g
}

fn profile_gradient(x: &[f64], n: usize, constants: &ExpansionConstants, p: &dyn Potential) -> Result<Vec<f64>> {
    let g = profile_value(x, n, constants, p)?;
    Ok(log_gradient(p, x).into_iter().map(|v| g * v).collect())
}

fn fd_hessian(x: &[f64], h: f64, grad: &dyn Fn(&[f64]) -> Result<Vec<f64>>) -> Result<DMatrix<f64>> {
    let k = x.len();
    let mut hm = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let gp = grad(&xp)?;
        let gm = grad(&xm)?;
        for i in 0..k {
            hm[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    Ok((&hm + hm.transpose()) * 0.5)
}

fn classify(h: &DMatrix<f64>) -> Classification {
    let eig = SymmetricEigen::new(h.clone());
    let largest = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if eig.eigenvalues.iter().any(|v| v.abs() <= 1e-8 * largest) || largest == 0.0 {
        return Classification::Degenerate;
    }
    let pos = eig.eigenvalues.iter().filter(|v| **v > 0.0).count();
    match pos {
        p if p == h.nrows() => Classification::Min,
        0 => Classification::Max,
        _ => Classification::Saddle,
    }
}

/// Newton on the `(t, ỹ*)`-gradient of the profile `g` inside the ball of
/// radius ϑ around `center`, with a finite-difference Hessian.
pub fn find_reduced_critical_point(
    n: usize,
    constants: &ExpansionConstants,
    p: &dyn Potential,
    center: &[f64],
    opts: SearchOptions,
) -> Result<CriticalPointResult> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter("n must be even and at least 2".into()));
    }
    if center.len() != 1 + p.tail_len() {
        return Err(Error::DimensionMismatch {
            expected: 1 + p.tail_len(),
            got: center.len(),
        });
    }
    let grad = |x: &[f64]| profile_gradient(x, n, constants, p);
    let h = 1e-4 * opts.theta;
    let finish = |x: Vec<f64>, it: usize, class: Classification| -> Result<CriticalPointResult> {
        let g = grad(&x)?;
        Ok(CriticalPointResult {
            t: x[0],
            mu: critical_mu(x[0], &x[1..], n, constants, p)?,
            tail: x[1..].to_vec(),
            gradient_norm: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
            classification: class,
            iterations: it,
        })
    };
    let mut x = center.to_vec();
    for it in 0..=opts.max_steps {
        let lg = log_gradient(p, &x);
        let lg_norm = lg.iter().map(|v| v * v).sum::<f64>().sqrt();
        let hess = fd_hessian(&x, h, &grad)?;
        if lg_norm < opts.tol {
            return finish(x, it, classify(&hess));
        }
        if it == opts.max_steps {
            break;
        }
        let g = DVector::from_vec(grad(&x)?);
        let step = match hess.clone().lu().solve(&(-g)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return finish(x, it, Classification::Degenerate),
        };
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi += si;
        }
        let off: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if !(off <= opts.theta) {
            return Err(Error::EscapedSearchBox);
        }
        if step.norm() < 1e-15 * x[0].abs() {
            let hess = fd_hessian(&x, h, &grad)?;
            return finish(x, it + 1, classify(&hess));
        }
    }
    Err(Error::NoCriticalPoint)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudyResult {
    pub n_values: Vec<usize>,
    pub mu_star: Vec<f64>,
    pub fitted_exponent: f64,
    pub target_exponent: f64,
    pub residual_of_fit: f64,
}

/// Least-squares slope and intercept of `ys` on `xs`, with the RMS residual.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / k).sqrt())
}

/// Fit of `log μ*` against `log n` at a fixed point `x = (t, ỹ*)`.
pub fn scaling_study(
    n_values: &[usize],
    constants: &ExpansionConstants,
    p: &dyn Potential,
    x: &[f64],
) -> Result<ScalingStudyResult> {
    if n_values.len() < 2 {
        return Err(Error::InvalidParameter("scaling study needs at least two n values".into()));
    }
    if n_values.iter().any(|n| *n < 2 || n % 2 != 0) {
        return Err(Error::InvalidParameter("n values must be even and at least 2".into()));
    }
    let mu_star = n_values
        .iter()
        .map(|&n| critical_mu(x[0], &x[1..], n, constants, p))
        .collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = n_values.iter().map(|n| (*n as f64).ln()).collect();
    let ly: Vec<f64> = mu_star.iter().map(|m| m.ln()).collect();
    let (slope, _, rms) = linear_fit(&lx, &ly);
    let dim = p.dim() as f64;
    Ok(ScalingStudyResult {
        n_values: n_values.to_vec(),
        mu_star,
        fitted_exponent: slope,
        target_exponent: (dim - 2.0) / (dim - 4.0),
        residual_of_fit: rms,
    })
}

/// Powers of two from `lo` to `hi` inclusive.
pub fn dyadic_range(lo: usize, hi: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut n = lo;
    while n <= hi {
        v.push(n);
        n *= 2;
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDecayResult {
    pub multipliers: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub norms: Vec<f64>,
    pub argmax_points: Vec<Vec<f64>>,
    pub fitted_slope: f64,
    pub strictly_decreasing: bool,
}

/// Which stand-in is used for the m-ring solution in the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRingModel {
    /// The leading-order m-ring ansatz `Σ ζ̂ U_{x̂_j,λ}`.
    Ansatz,
    Zero,
}

/// Ray length and far-field extent of the residual cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualCloud {
    pub far_radius: f64,
    pub far_octaves: usize,
}

impl Default for ResidualCloud {
    fn default() -> Self {
        ResidualCloud {
            far_radius: 1.0,
            far_octaves: 8,
        }
    }
}

/// `‖l_n‖_{**}` at `μ = multiplier · cfg.mu` and the log-log slope against μ.
/// The cloud is anchored at both rings.
pub fn residual_decay_study(
    cfg: &TowerConfig,
    multipliers: &[f64],
    v: &dyn Field,
    model: MRingModel,
    cloud: ResidualCloud,
) -> Result<ResidualDecayResult> {
    cfg.validate()?;
    if multipliers.len() < 2 {
        return Err(Error::InvalidParameter("need at least two μ multipliers".into()));
    }
    let dim = cfg.dim();
    let zero = ConstantField { dim, value: 0.0 };
    let mut mu_values = Vec::new();
    let mut norms = Vec::new();
    let mut argmax_points = Vec::new();
    for &k in multipliers {
        let c = cfg.with_mu(k * cfg.mu);
        let um = Ansatz::new(&c, AnsatzPart::MRing);
        let um: &dyn Field = match model {
            MRingModel::Ansatz => &um,
            MRingModel::Zero => &zero,
        };
        let centers = c.n_centers();
        let mut spec = CloudSpec::around(&centers, c.mu, cloud.far_radius).with_anchors(&c.m_centers(), c.lambda);
        spec.far_octaves = cloud.far_octaves;
        let points = structured_cloud(dim, &spec);
        let kind = WeightedNormKind::new(NormKind::DoubleStar, centers, c.mu);
        let r = weighted_norm(|y| eval_residual_ln(&c, um, v, y), &points, &kind)?;
        mu_values.push(c.mu);
        norms.push(r.value);
        argmax_points.push(r.point);
    }
    let lx: Vec<f64> = mu_values.iter().map(|m| m.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, _, _) = linear_fit(&lx, &ly);
    Ok(ResidualDecayResult {
        multipliers: multipliers.to_vec(),
        mu_values,
        strictly_decreasing: norms.windows(2).all(|w| w[1] < w[0]),
        norms,
        argmax_points,
        fitted_slope: slope,
    })
}
