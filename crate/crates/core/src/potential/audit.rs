use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{derivative_unchecked, laplacian, laplacian_gradient, local_derivatives, unit, Potential, Symmetry};
use crate::error::{Error, Result};
use crate::numerics::SectorFace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub point: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Gradient and Hessian of `f = r² V` in reduced coordinates.
fn f_derivatives(p: &dyn Potential, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = local_derivatives(p, x);
    let r = x[0];
    let n = x.len();
    let mut g = vec![0.0; n];
    g[0] = 2.0 * r * d.v + r * r * d.grad[0];
    for i in 1..n {
        g[i] = r * r * d.grad[i];
    }
    let mut h = vec![vec![0.0; n]; n];
    h[0][0] = 2.0 * d.v + 4.0 * r * d.grad[0] + r * r * d.hess[0][0];
    for i in 1..n {
        let v = 2.0 * r * d.grad[i] + r * r * d.hess[0][i];
        h[0][i] = v;
        h[i][0] = v;
        for j in 1..n {
            h[i][j] = r * r * d.hess[i][j];
        }
    }
    (g, h)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn to_matrix(h: &[Vec<f64>]) -> DMatrix<f64> {
    let n = h.len();
    DMatrix::from_fn(n, n, |i, j| h[i][j])
}

/// Damped Newton on `∇(r²V)`.
pub fn find_critical_point(p: &dyn Potential, guess: &[f64], opts: NewtonOptions) -> Result<CriticalPoint> {
    let n = 1 + p.tail_len();
    if guess.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: guess.len(),
        });
    }
    let mut x = guess.to_vec();
    let (mut g, mut h) = f_derivatives(p, &x);
    let mut gn = norm(&g);
    for it in 0..=opts.max_steps {
        if !gn.is_finite() {
            return Err(Error::NoCriticalPoint);
        }
        if gn < opts.tol {
            if x[0] <= 0.0 {
                return Err(Error::NonPositiveRadius);
            }
            return Ok(CriticalPoint {
                point: x,
                gradient_norm: gn,
                iterations: it,
            });
        }
        if it == opts.max_steps {
            break;
        }
        let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
        let step = to_matrix(&h).lu().solve(&rhs).ok_or(Error::NoCriticalPoint)?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoCriticalPoint);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let (tg, th) = f_derivatives(p, &trial);
            let tn = norm(&tg);
            if tn < gn {
                x = trial;
                g = tg;
                h = th;
                gn = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoCriticalPoint);
        }
    }
    Err(Error::NoCriticalPoint)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalAnalysis {
    pub hessian: Vec<Vec<f64>>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub local_degree: i32,
}

pub fn hessian_of_f(p: &dyn Potential, cp: &[f64]) -> Vec<Vec<f64>> {
    f_derivatives(p, cp).1
}

/// Spectrum of `∇²(r²V)` and the local degree `sign det`.
pub fn analyze_critical_point(p: &dyn Potential, cp: &[f64]) -> Result<CriticalAnalysis> {
    let hessian = hessian_of_f(p, cp);
    let eig = SymmetricEigen::new(to_matrix(&hessian));
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    if eigenvalues.iter().any(|l| l.abs() < 1e-8) {
        return Err(Error::DegenerateCriticalPoint);
    }
    let negatives = eigenvalues.iter().filter(|l| **l < 0.0).count();
    Ok(CriticalAnalysis {
        hessian,
        eigenvalues,
        local_degree: if negatives % 2 == 0 { 1 } else { -1 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixVariant {
    /// (N-3)-sided, for potentials radial in (y₁..y₄).
    TildeV,
    /// (N-1)-sided, for potentials radial in (y₁, y₂).
    TildeVPrime,
}

impl MatrixVariant {
    pub fn for_symmetry(sym: Symmetry) -> Self {
        match sym {
            Symmetry::FourDim => MatrixVariant::TildeV,
            Symmetry::TwoDim => MatrixVariant::TildeVPrime,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MatrixVariant::TildeV => "tilde_v",
            MatrixVariant::TildeVPrime => "tilde_v_prime",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tilde_v" => Some(MatrixVariant::TildeV),
            "tilde_v_prime" => Some(MatrixVariant::TildeVPrime),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceMatrix {
    pub face: SectorFace,
    pub matrix: Vec<Vec<f64>>,
    pub det: f64,
    pub threshold: f64,
    pub passes: bool,
}

/// The non-degeneracy matrix `A` at the critical point, with `ν` the outward
/// normal of the chosen flat face of the sector around the first ring center
/// `x₁ = (r₀, 0, …, 0, y₀*)`.
pub fn assemble_nondegeneracy_matrix(
    p: &dyn Potential,
    cp: &[f64],
    variant: MatrixVariant,
    m: usize,
    face: SectorFace,
) -> Result<FaceMatrix> {
    if MatrixVariant::for_symmetry(p.symmetry()) != variant {
        return Err(Error::SymmetryMismatch);
    }
    if m < 2 {
        return Err(Error::InvalidParameter("sector count m must be at least 2".into()));
    }
    let k = p.symmetry().radial_dims();
    let dim = p.dim();
    let size = cp.len();
    let lap = laplacian(p, cp);
    if !(lap.abs() > 1e-12) {
        return Err(Error::LaplacianVanishes);
    }
    let lap_grad = laplacian_gradient(p, cp);
    let mut x1 = vec![0.0; dim];
    x1[0] = cp[0];
    x1[k..].copy_from_slice(&cp[1..]);
    let nu = face.normal(m, dim);
    let nu_x1: f64 = nu.iter().zip(&x1).map(|(a, b)| a * b).sum();
    if nu_x1.abs() <= 1e-15 * cp[0].abs().max(1.0) {
        return Err(Error::NormalOrthogonalToCenter);
    }
    let nu_at = |i: usize| if i == 0 { nu[0] } else { nu[k + i - 1] };
    let d = |e: &[(usize, u32)]| derivative_unchecked(p, cp, &unit(size, e));
    let hess: Vec<Vec<f64>> = (0..size)
        .map(|i| (0..size).map(|j| d(&[(i, 1), (j, 1)])).collect())
        .collect();
    // r V_{r,l} + Σ_j y_j V_{j,l}
    let w = |l: usize| {
        let mut s = cp[0] * hess[0][l];
        for j in 1..size {
            s += cp[j] * hess[j][l];
        }
        s
    };
    let coef = |i: usize| lap_grad[i] / (2.0 * lap) + nu_at(i) / nu_x1;
    let mut a = vec![vec![0.0; size]; size];
    for i in 0..size {
        for l in 0..size {
            a[i][l] = if i >= 1 && l == 0 {
                let row = (i + 1) as f64;
                (2.0 * row * PI / m as f64).cos() * (hess[0][i] - coef(i) * w(0))
            } else {
                hess[i][l] - coef(i) * w(l)
            };
        }
    }
    let det = to_matrix(&a).lu().determinant();
    let max_entry = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = 1e-8 * max_entry.powi(size as i32);
    Ok(FaceMatrix {
        face,
        matrix: a,
        det,
        threshold,
        passes: det.abs() > threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionVerdict {
    pub obstructed: bool,
    pub min_slope: f64,
    pub max_slope: f64,
    /// First grid interval where `d(r²V)/dr` changes sign.
    pub sign_change: Option<(f64, f64)>,
}

impl ObstructionVerdict {
    pub fn label(&self) -> &'static str {
        if self.obstructed {
            "obstructed (no solution)"
        } else {
            "not obstructed"
        }
    }
}

/// Scan `d(r²V)/dr` over `samples` points of `[a, b]` at fixed tail.
/// Slopes with magnitude below `tol` count as zero.
pub fn monotonicity_obstruction(
    p: &dyn Potential,
    tail: &[f64],
    interval: (f64, f64),
    samples: usize,
    tol: f64,
) -> ObstructionVerdict {
    let (a, b) = interval;
    let n = 1 + tail.len();
    let mut x = vec![0.0; n];
    x[1..].copy_from_slice(tail);
    let mut min_slope = f64::INFINITY;
    let mut max_slope = f64::NEG_INFINITY;
    let mut sign_change = None;
    let mut last: Option<(f64, f64)> = None;
    for i in 0..samples {
        let r = a + (b - a) * i as f64 / (samples.max(2) - 1) as f64;
        x[0] = r;
        let slope = 2.0 * r * p.value(&x) + r * r * derivative_unchecked(p, &x, &unit(n, &[(0, 1)]));
        min_slope = min_slope.min(slope);
        max_slope = max_slope.max(slope);
        if slope.abs() > tol {
            if let Some((r_prev, s_prev)) = last {
                if sign_change.is_none() && s_prev.signum() != slope.signum() {
                    sign_change = Some((r_prev, r));
                }
            }
            last = Some((r, slope));
        }
    }
    ObstructionVerdict {
        obstructed: sign_change.is_none(),
        min_slope,
        max_slope,
        sign_change,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub guess: Option<Vec<f64>>,
    pub m: usize,
    pub face: SectorFace,
    pub newton: NewtonOptions,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            guess: None,
            m: 8,
            face: SectorFace::Plus,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionResults {
    /// r₀ > 0, V(cp) > 0, local degree ≠ 0.
    pub v: bool,
    /// |det A| above threshold on the selected face.
    pub tilde_v: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub potential: String,
    pub dimension: usize,
    pub symmetry: Symmetry,
    pub critical_point: Vec<f64>,
    pub gradient_norm: f64,
    pub newton_iterations: usize,
    pub v_at_cp: f64,
    pub hessian_of_f: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub local_degree: Option<i32>,
    pub variant: MatrixVariant,
    pub m: usize,
    pub face: SectorFace,
    pub matrix_a: Option<Vec<Vec<f64>>>,
    pub det_a: Option<f64>,
    pub faces: Vec<FaceMatrix>,
    pub assumptions_passed: AssumptionResults,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.assumptions_passed.v && self.assumptions_passed.tilde_v
    }
}

/// Critical point, spectrum, degree and non-degeneracy matrices on both faces.
/// Fails only when no critical point is found.
pub fn audit(p: &dyn Potential, opts: &AuditOptions) -> Result<AuditReport> {
    let guess = opts.guess.clone().unwrap_or_else(|| p.default_guess());
    let cp = find_critical_point(p, &guess, opts.newton)?;
    let x = cp.point.clone();
    let v_at_cp = p.value(&x);
    let mut notes = Vec::new();
    let hessian = hessian_of_f(p, &x);
    let (eigenvalues, local_degree) = match analyze_critical_point(p, &x) {
        Ok(a) => (a.eigenvalues, Some(a.local_degree)),
        Err(e) => {
            notes.push(e.to_string());
            let eig = SymmetricEigen::new(to_matrix(&hessian));
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            (ev, None)
        }
    };
    if v_at_cp <= 0.0 {
        notes.push("V at the critical point is not positive".into());
    }
    let variant = MatrixVariant::for_symmetry(p.symmetry());
    let mut faces = Vec::new();
    for face in [SectorFace::Plus, SectorFace::Minus] {
        match assemble_nondegeneracy_matrix(p, &x, variant, opts.m, face) {
            Ok(fm) => faces.push(fm),
            Err(e) => {
                notes.push(format!("{} face: {e}", face.as_str()));
            }
        }
    }
    let selected = faces.iter().find(|f| f.face == opts.face).cloned();
    let v_ok = x[0] > 0.0 && v_at_cp > 0.0 && local_degree.is_some_and(|d| d != 0);
    Ok(AuditReport {
        potential: p.describe(),
        dimension: p.dim(),
        symmetry: p.symmetry(),
        critical_point: x,
        gradient_norm: cp.gradient_norm,
        newton_iterations: cp.iterations,
        v_at_cp,
        hessian_of_f: hessian,
        eigenvalues,
        local_degree,
        variant,
        m: opts.m,
        face: opts.face,
        matrix_a: selected.as_ref().map(|f| f.matrix.clone()),
        det_a: selected.as_ref().map(|f| f.det),
        assumptions_passed: AssumptionResults {
            v: v_ok,
            tilde_v: selected.as_ref().is_some_and(|f| f.passes),
        },
        faces,
        notes,
    })
}
