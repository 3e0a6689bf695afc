//! Scalar fields on ℝ^N with optional closed-form derivatives.

/// Value, gradient and Laplacian of a field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
}

impl Jet {
    pub fn zero(dim: usize) -> Self {
        Jet {
            value: 0.0,
            gradient: vec![0.0; dim],
            laplacian: 0.0,
        }
    }

    pub fn add_assign(&mut self, other: &Jet) {
        self.value += other.value;
        for (g, o) in self.gradient.iter_mut().zip(&other.gradient) {
            *g += o;
        }
        self.laplacian += other.laplacian;
    }

    /// Jet of the product `self * other`.
    pub fn product(&self, other: &Jet) -> Jet {
        let dot: f64 = self
            .gradient
            .iter()
            .zip(&other.gradient)
            .map(|(a, b)| a * b)
            .sum();
        Jet {
            value: self.value * other.value,
            gradient: self
                .gradient
                .iter()
                .zip(&other.gradient)
                .map(|(a, b)| a * other.value + self.value * b)
                .collect(),
            laplacian: self.laplacian * other.value + 2.0 * dot + self.value * other.laplacian,
        }
    }
}

pub trait Field: Sync {
    fn dim(&self) -> usize;

    fn value(&self, y: &[f64]) -> f64;

    /// Closed-form value, gradient and Laplacian. `None` for value-only fields.
    fn jet(&self, _y: &[f64]) -> Option<Jet> {
        None
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        (**self).value(y)
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        (**self).jet(y)
    }
}

impl<F: Field + ?Sized> Field for Box<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        (**self).value(y)
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        (**self).jet(y)
    }
}

/// Value-only field backed by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Field for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
}

/// Field whose closure returns the full jet.
pub struct JetField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Jet + Sync> JetField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        JetField { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Jet + Sync> Field for JetField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        (self.f)(y).value
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        Some((self.f)(y))
    }
}

/// The constant field `c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField {
    pub dim: usize,
    pub value: f64,
}

impl Field for ConstantField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _y: &[f64]) -> f64 {
        self.value
    }
    fn jet(&self, _y: &[f64]) -> Option<Jet> {
        Some(Jet {
            value: self.value,
            gradient: vec![0.0; self.dim],
            laplacian: 0.0,
        })
    }
}

/// Isotropic Gaussian `amplitude * exp(-rate * |y - center|^2)`.
#[derive(Debug, Clone)]
pub struct Gaussian {
    pub center: Vec<f64>,
    pub rate: f64,
    pub amplitude: f64,
}

impl Gaussian {
    pub fn centered(dim: usize, rate: f64) -> Self {
        Gaussian {
            center: vec![0.0; dim],
            rate,
            amplitude: 1.0,
        }
    }
}

impl Field for Gaussian {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.amplitude * (-self.rate * dist2(y, &self.center)).exp()
    }
    fn jet(&self, y: &[f64]) -> Option<Jet> {
        let n = self.center.len() as f64;
        let r2 = dist2(y, &self.center);
        let v = self.amplitude * (-self.rate * r2).exp();
        Some(Jet {
            value: v,
            gradient: y
                .iter()
                .zip(&self.center)
                .map(|(a, c)| -2.0 * self.rate * (a - c) * v)
                .collect(),
            laplacian: v * (4.0 * self.rate * self.rate * r2 - 2.0 * self.rate * n),
        })
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Central finite-difference gradient and Laplacian, for cross-checking jets.
pub fn finite_difference_jet<F: Field + ?Sized>(f: &F, y: &[f64], h: f64) -> Jet {
    let n = y.len();
    let f0 = f.value(y);
    let mut gradient = vec![0.0; n];
    let mut laplacian = 0.0;
    let mut p = y.to_vec();
    for i in 0..n {
        p[i] = y[i] + h;
        let fp = f.value(&p);
        p[i] = y[i] - h;
        let fm = f.value(&p);
        p[i] = y[i];
        gradient[i] = (fp - fm) / (2.0 * h);
        laplacian += (fp - 2.0 * f0 + fm) / (h * h);
    }
    Jet {
        value: f0,
        gradient,
        laplacian,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_jet_matches_finite_differences() {
        let g = Gaussian {
            center: vec![0.1, -0.2, 0.3],
            rate: 1.5,
            amplitude: 2.0,
        };
        let y = [0.4, 0.1, -0.5];
        let exact = g.jet(&y).unwrap();
        let fd = finite_difference_jet(&g, &y, 1e-4);
        for (a, b) in exact.gradient.iter().zip(&fd.gradient) {
            assert!((a - b).abs() < 1e-7);
        }
        assert!((exact.laplacian - fd.laplacian).abs() < 1e-5);
    }

    #[test]
    fn product_rule() {
        let a = Gaussian::centered(2, 1.0);
        let b = Gaussian {
            center: vec![0.5, 0.0],
            rate: 0.5,
            amplitude: 1.0,
        };
        let y = [0.3, 0.7];
        let prod = a.jet(&y).unwrap().product(&b.jet(&y).unwrap());
        let f = FnField::new(2, |p: &[f64]| a.value(p) * b.value(p));
        let fd = finite_difference_jet(&f, &y, 1e-4);
        assert!((prod.laplacian - fd.laplacian).abs() < 1e-6);
    }
}
