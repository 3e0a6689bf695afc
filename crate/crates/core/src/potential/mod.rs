//! Potentials `V(r, y*)` with the assumed rotational symmetry, their
//! derivatives, and the audit of the concentration assumptions.

mod audit;
mod poly;

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Jet};

pub use audit::{
    analyze_critical_point, assemble_nondegeneracy_matrix, audit, find_critical_point,
    monotonicity_obstruction, AuditOptions, AuditReport, CriticalAnalysis, CriticalPoint,
    hessian_of_f, AssumptionResults, FaceMatrix, MatrixVariant, NewtonOptions, ObstructionVerdict,
};
pub use poly::{parse_polynomial, Polynomial};

/// Which block of coordinates `V` is radial in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// `V(|(y₁..y₄)|, y₅..y_N)`.
    FourDim,
    /// `V(|(y₁,y₂)|, y₃..y_N)`.
    TwoDim,
}

impl Symmetry {
    pub fn radial_dims(self) -> usize {
        match self {
            Symmetry::FourDim => 4,
            Symmetry::TwoDim => 2,
        }
    }
}

/// Ball `B_ϱ(r₀, y₀*)` in reduced coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Neighborhood {
    pub fn contains(&self, x: &[f64]) -> bool {
        crate::field::dist2(x, &self.center) <= self.radius * self.radius
    }
}

/// Reduced coordinates are `x = (r, y*)`; `x.len() = 1 + N - radial_dims`.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn symmetry(&self) -> Symmetry;
    fn value(&self, x: &[f64]) -> f64;

    /// Closed-form `∂^α V`, `α` indexed like `x`.
    fn analytic_derivative(&self, _x: &[f64], _alpha: &[u32]) -> Option<f64> {
        None
    }

    fn neighborhood(&self) -> Option<Neighborhood> {
        None
    }

    fn describe(&self) -> String;

    fn tail_len(&self) -> usize {
        self.dim() - self.symmetry().radial_dims()
    }

    /// Suggested start for critical-point searches.
    fn default_guess(&self) -> Vec<f64> {
        let mut g = vec![0.0; 1 + self.tail_len()];
        g[0] = 1.0;
        g
    }
}

/// Finite-difference base step: `ϱ` when a neighborhood is declared, else 1.
fn fd_scale(p: &dyn Potential) -> f64 {
    p.neighborhood().map_or(1.0, |n| n.radius)
}

/// Central stencil for `∂^k` along one axis with O(h²) error.
fn stencil(k: u32) -> &'static [(f64, f64)] {
    match k {
        0 => &[(0.0, 1.0)],
        1 => &[(1.0, 0.5), (-1.0, -0.5)],
        2 => &[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
        3 => &[(2.0, 0.5), (1.0, -1.0), (-1.0, 1.0), (-2.0, -0.5)],
        _ => unreachable!("orders above 3 are rejected earlier"),
    }
}

fn tensor_difference(p: &dyn Potential, x: &[f64], alpha: &[u32], h: f64) -> f64 {
    let axes: Vec<usize> = (0..x.len()).filter(|&i| alpha[i] > 0).collect();
    let mut acc = 0.0;
    let mut idx = vec![0usize; axes.len()];
    let mut y = x.to_vec();
    loop {
        let mut w = 1.0;
        for (k, &a) in axes.iter().enumerate() {
            let (off, wk) = stencil(alpha[a])[idx[k]];
            y[a] = x[a] + off * h;
            w *= wk;
        }
        acc += w * p.value(&y);
        let mut k = 0;
        loop {
            if k == axes.len() {
                let order: u32 = alpha.iter().sum();
                return acc / h.powi(order as i32);
            }
            idx[k] += 1;
            if idx[k] < stencil(alpha[axes[k]]).len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Richardson-extrapolated central difference, step `ϱ·10^{-4/k}` for total
/// order `k`.
pub fn finite_difference(p: &dyn Potential, x: &[f64], alpha: &[u32]) -> f64 {
    let order: u32 = alpha.iter().sum();
    if order == 0 {
        return p.value(x);
    }
    let h = fd_scale(p) * 10f64.powf(-4.0 / order as f64);
    let coarse = tensor_difference(p, x, alpha, h);
    let fine = tensor_difference(p, x, alpha, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

fn derivative_unchecked(p: &dyn Potential, x: &[f64], alpha: &[u32]) -> f64 {
    p.analytic_derivative(x, alpha)
        .unwrap_or_else(|| finite_difference(p, x, alpha))
}

/// `∂^α V(x)` for `|α| ≤ 3`. Derivatives are only served inside the
/// declared neighborhood.
#[allow(non_snake_case)]
pub fn eval_V(p: &dyn Potential, x: &[f64], alpha: &[u32]) -> Result<f64> {
    if x.len() != 1 + p.tail_len() || alpha.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 + p.tail_len(),
            got: x.len().min(alpha.len()),
        });
    }
    let order: u32 = alpha.iter().sum();
    if order > 3 {
        return Err(Error::DerivativeOrder(order as usize));
    }
    if order >= 1 {
        if let Some(nb) = p.neighborhood() {
            if !nb.contains(x) {
                return Err(Error::OutsideNeighborhood);
            }
        }
    }
    Ok(derivative_unchecked(p, x, alpha))
}

fn unit(len: usize, entries: &[(usize, u32)]) -> Vec<u32> {
    let mut a = vec![0; len];
    for &(i, k) in entries {
        a[i] += k;
    }
    a
}

/// Reduced-coordinate derivative tables at one point.
pub(crate) struct LocalDerivatives {
    pub v: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

pub(crate) fn local_derivatives(p: &dyn Potential, x: &[f64]) -> LocalDerivatives {
    let n = x.len();
    let d = |e: &[(usize, u32)]| derivative_unchecked(p, x, &unit(n, e));
    let grad = (0..n).map(|i| d(&[(i, 1)])).collect();
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = d(&[(i, 1), (j, 1)]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    LocalDerivatives {
        v: p.value(x),
        grad,
        hess,
    }
}

/// `ΔV` in ambient coordinates, `V_rr + (k-1)V_r/r + Σ V_zz`.
pub fn laplacian(p: &dyn Potential, x: &[f64]) -> f64 {
    let k = p.symmetry().radial_dims() as f64;
    let n = x.len();
    let d = |e: &[(usize, u32)]| derivative_unchecked(p, x, &unit(n, e));
    let mut lap = d(&[(0, 2)]) + (k - 1.0) * d(&[(0, 1)]) / x[0];
    for i in 1..n {
        lap += d(&[(i, 2)]);
    }
    lap
}

/// Reduced gradient of `ΔV`: `(∂_r ΔV, ∂_{z_i} ΔV)`.
pub fn laplacian_gradient(p: &dyn Potential, x: &[f64]) -> Vec<f64> {
    let k = p.symmetry().radial_dims() as f64;
    let n = x.len();
    let r = x[0];
    let d = |e: &[(usize, u32)]| derivative_unchecked(p, x, &unit(n, e));
    let mut out = Vec::with_capacity(n);
    let mut dr = d(&[(0, 3)]) + (k - 1.0) * (d(&[(0, 2)]) / r - d(&[(0, 1)]) / (r * r));
    for j in 1..n {
        dr += d(&[(0, 1), (j, 2)]);
    }
    out.push(dr);
    for i in 1..n {
        let mut di = d(&[(0, 2), (i, 1)]) + (k - 1.0) * d(&[(0, 1), (i, 1)]) / r;
        for j in 1..n {
            di += d(&[(j, 2), (i, 1)]);
        }
        out.push(di);
    }
    out
}

/// Reduced coordinates of an ambient point.
pub fn reduce(sym: Symmetry, y: &[f64]) -> Vec<f64> {
    let k = sym.radial_dims();
    let mut x = Vec::with_capacity(1 + y.len() - k);
    x.push(y[..k].iter().map(|v| v * v).sum::<f64>().sqrt());
    x.extend_from_slice(&y[k..]);
    x
}

/// `V` as a field on ℝ^N.
#[derive(Clone)]
pub struct AmbientPotential {
    inner: Arc<dyn Potential>,
}

impl AmbientPotential {
    pub fn new(p: Arc<dyn Potential>) -> Self {
        AmbientPotential { inner: p }
    }
}

impl Field for AmbientPotential {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.inner.value(&reduce(self.inner.symmetry(), y))
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        let p = self.inner.as_ref();
        let k = p.symmetry().radial_dims();
        let x = reduce(p.symmetry(), y);
        let n = x.len();
        let vr = derivative_unchecked(p, &x, &unit(n, &[(0, 1)]));
        let mut gradient = Vec::with_capacity(y.len());
        for v in &y[..k] {
            gradient.push(if x[0] > 0.0 { vr * v / x[0] } else { 0.0 });
        }
        for i in 1..n {
            gradient.push(derivative_unchecked(p, &x, &unit(n, &[(i, 1)])));
        }
        Some(Jet {
            value: p.value(&x),
            gradient,
            laplacian: laplacian(p, &x),
        })
    }
}

/// Potential backed by a closure in reduced coordinates.
pub struct FnPotential<F> {
    dim: usize,
    symmetry: Symmetry,
    f: F,
    neighborhood: Option<Neighborhood>,
    label: String,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnPotential<F> {
    pub fn new(dim: usize, symmetry: Symmetry, label: &str, f: F) -> Self {
        FnPotential {
            dim,
            symmetry,
            f,
            neighborhood: None,
            label: label.to_string(),
        }
    }

    pub fn with_neighborhood(mut self, nb: Neighborhood) -> Self {
        self.neighborhood = Some(nb);
        self
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Potential for FnPotential<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn neighborhood(&self) -> Option<Neighborhood> {
        self.neighborhood.clone()
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Polynomial potential with exact derivatives.
#[derive(Debug, Clone)]
pub struct PolynomialPotential {
    dim: usize,
    symmetry: Symmetry,
    poly: Polynomial,
    neighborhood: Option<Neighborhood>,
    guess: Option<Vec<f64>>,
    label: String,
}

impl PolynomialPotential {
    pub fn new(dim: usize, symmetry: Symmetry, poly: Polynomial, label: &str) -> Result<Self> {
        let expected = 1 + dim.checked_sub(symmetry.radial_dims()).ok_or(Error::InvalidParameter(
            "dimension smaller than the radial block".into(),
        ))?;
        if poly.nvars() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: poly.nvars(),
            });
        }
        Ok(PolynomialPotential {
            dim,
            symmetry,
            poly,
            neighborhood: None,
            guess: None,
            label: label.to_string(),
        })
    }

    /// Parse from `V = <polynomial in r and the tail variables>`.
    pub fn parse(text: &str, dim: usize, symmetry: Symmetry, line: usize) -> Result<Self> {
        let k = symmetry.radial_dims();
        if dim <= k {
            return Err(Error::InvalidParameter(format!("dimension {dim} too small for the symmetry")));
        }
        let poly = parse_polynomial(text, k + 1, dim - k, line)?;
        Self::new(dim, symmetry, poly, text.trim())
    }

    pub fn with_neighborhood(mut self, nb: Neighborhood) -> Self {
        self.neighborhood = Some(nb);
        self
    }

    pub fn with_guess(mut self, guess: Vec<f64>) -> Self {
        self.guess = Some(guess);
        self
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        PolynomialPotential {
            poly: self.poly.scale(c),
            label: format!("{c} * ({})", self.label),
            ..self.clone()
        }
    }
}

impl Potential for PolynomialPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }
    fn analytic_derivative(&self, x: &[f64], alpha: &[u32]) -> Option<f64> {
        Some(self.poly.eval_derivative(x, alpha))
    }
    fn neighborhood(&self) -> Option<Neighborhood> {
        self.neighborhood.clone()
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
    fn default_guess(&self) -> Vec<f64> {
        self.guess.clone().unwrap_or_else(|| {
            let mut g = vec![0.0; 1 + self.tail_len()];
            g[0] = 1.0;
            g
        })
    }
}

/// `r₀ = 1/√(8N - 34)`, the critical radius of the built-in example.
pub fn example_r0(dim: usize) -> f64 {
    1.0 / (8.0 * dim as f64 - 34.0).sqrt()
}

/// `V = r² - 4r Σ y_j + Σ y_j² + 1` (sums over the tail), declared on
/// `B_ϱ(r₀, y₀*)` with `y₀,j = 2r₀` and `ϱ = r₀/4`.
pub fn builtin_example_potential(dim: usize) -> Result<PolynomialPotential> {
    if dim < 7 {
        return Err(Error::InvalidParameter(format!("the built-in example needs N >= 7, got {dim}")));
    }
    let tail = dim - 4;
    let nvars = 1 + tail;
    let one = BigRational::one();
    let r = Polynomial::variable(nvars, 0);
    let mut sum = Polynomial::zero(nvars);
    let mut squares = Polynomial::zero(nvars);
    for i in 1..nvars {
        let y = Polynomial::variable(nvars, i);
        squares = squares.add(&y.mul(&y));
        sum = sum.add(&y);
    }
    let poly = r
        .mul(&r)
        .add(&r.mul(&sum).scale(&BigRational::from_integer((-4).into())))
        .add(&squares)
        .add(&Polynomial::constant(nvars, one));
    let r0 = example_r0(dim);
    let mut center = vec![2.0 * r0; nvars];
    center[0] = r0;
    let mut guess = vec![0.4; nvars];
    guess[0] = 0.2;
    Ok(PolynomialPotential::new(dim, Symmetry::FourDim, poly, "builtin:appendix_d")?
        .with_neighborhood(Neighborhood {
            center,
            radius: r0 / 4.0,
        })
        .with_guess(guess))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(dim: usize) -> Vec<f64> {
        let r0 = example_r0(dim);
        let mut x = vec![2.0 * r0; dim - 3];
        x[0] = r0;
        x
    }

    #[test]
    fn example_values_at_the_critical_point() {
        let p = builtin_example_potential(7).unwrap();
        let x = cp(7);
        assert!((eval_V(&p, &x, &[0, 0, 0, 0]).unwrap() - 0.5).abs() < 1e-14);
        assert!((eval_V(&p, &x, &[2, 0, 0, 0]).unwrap() - 2.0).abs() < 1e-14);
        assert!((eval_V(&p, &x, &[1, 1, 0, 0]).unwrap() + 4.0).abs() < 1e-14);
        assert!((eval_V(&p, &x, &[1, 0, 0, 1]).unwrap() + 4.0).abs() < 1e-14);
    }

    #[test]
    fn example_laplacian_and_its_gradient() {
        for dim in [7, 8, 10] {
            let p = builtin_example_potential(dim).unwrap();
            let x = cp(dim);
            let r0 = x[0];
            let n = dim as f64;
            assert!((laplacian(&p, &x) - (96.0 - 22.0 * n)).abs() < 1e-10);
            let g = laplacian_gradient(&p, &x);
            assert!((g[0] - 24.0 * (n - 4.0) / r0).abs() < 1e-9);
            for gi in &g[1..] {
                assert!((gi + 12.0 / r0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn finite_differences_agree_with_exact_derivatives() {
        let p = builtin_example_potential(7).unwrap();
        let fd_only = FnPotential::new(7, Symmetry::FourDim, "fd", |x: &[f64]| p.value(x))
            .with_neighborhood(p.neighborhood().unwrap());
        let mut x = cp(7);
        x[0] += 0.01;
        x[2] -= 0.02;
        let alphas: Vec<Vec<u32>> = vec![
            vec![1, 0, 0, 0],
            vec![0, 0, 1, 0],
            vec![2, 0, 0, 0],
            vec![1, 1, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 2, 0],
            vec![3, 0, 0, 0],
            vec![2, 1, 0, 0],
            vec![1, 0, 1, 1],
        ];
        for a in &alphas {
            let exact = eval_V(&p, &x, a).unwrap();
            let fd = eval_V(&fd_only, &x, a).unwrap();
            assert!((exact - fd).abs() < 1e-7 * exact.abs().max(1.0), "{a:?}: {exact} vs {fd}");
        }
    }

    #[test]
    fn derivatives_refuse_outside_the_neighborhood() {
        let p = builtin_example_potential(7).unwrap();
        let far = [1.0, 0.0, 0.0, 0.0];
        assert!(eval_V(&p, &far, &[0, 0, 0, 0]).is_ok());
        assert_eq!(eval_V(&p, &far, &[1, 0, 0, 0]).unwrap_err(), Error::OutsideNeighborhood);
        assert_eq!(
            eval_V(&p, &cp(7), &[2, 2, 0, 0]).unwrap_err(),
            Error::DerivativeOrder(4)
        );
    }

    #[test]
    fn example_is_nonnegative_on_its_neighborhood() {
        let p = builtin_example_potential(7).unwrap();
        let nb = p.neighborhood().unwrap();
        let c = &nb.center;
        let mut lowest = f64::INFINITY;
        let steps = [-1.0, -0.5, 0.0, 0.5, 1.0];
        for a in steps {
            for b in steps {
                for d in steps {
                    for e in steps {
                        let v = [a, b, d, e];
                        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt().max(1.0);
                        let x: Vec<f64> = c.iter().zip(v).map(|(ci, vi)| ci + nb.radius * vi / norm).collect();
                        lowest = lowest.min(p.value(&x));
                    }
                }
            }
        }
        assert!(lowest > 0.0, "{lowest}");
    }

    #[test]
    fn ambient_jet_matches_finite_differences() {
        let p: Arc<dyn Potential> = Arc::new(builtin_example_potential(7).unwrap());
        let field = AmbientPotential::new(p);
        let y = [0.15, 0.1, -0.05, 0.08, 0.4, 0.45, 0.42];
        let exact = field.jet(&y).unwrap();
        let fd = crate::field::finite_difference_jet(&field, &y, 1e-4);
        for (a, b) in exact.gradient.iter().zip(&fd.gradient) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((exact.laplacian - fd.laplacian).abs() < 1e-4);
    }

    #[test]
    fn parsed_potential_matches_builtin() {
        let text = "V = r^2 - 4r(y5 + y6 + y7) + y5^2 + y6^2 + y7^2 + 1";
        let parsed = PolynomialPotential::parse(text, 7, Symmetry::FourDim, 1).unwrap();
        let builtin = builtin_example_potential(7).unwrap();
        assert_eq!(parsed.polynomial(), builtin.polynomial());
    }
}
