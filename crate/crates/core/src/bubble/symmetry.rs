//! Averaging over the dihedral group generated by the rotations by `2π/m`
//! in the (y₁, y₂)-plane and the reflection `y₂ ↦ -y₂`.

use std::f64::consts::PI;

use crate::field::{Field, Jet};

/// Group element `y ↦ R_j F^s y` with `R_j` rotation by `2πj/m` and `F` the
/// reflection of `y₂`.
#[derive(Debug, Clone, Copy)]
struct Element {
    cos: f64,
    sin: f64,
    flip: bool,
}

impl Element {
    fn apply(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
        let y2 = if self.flip { -y[1] } else { y[1] };
        out[0] = self.cos * y[0] - self.sin * y2;
        out[1] = self.sin * y[0] + self.cos * y2;
    }

    /// Pull a gradient back: `Gᵀ g`.
    fn pull_back(&self, g: &mut [f64]) {
        let (a, b) = (g[0], g[1]);
        g[0] = self.cos * a + self.sin * b;
        let g2 = -self.sin * a + self.cos * b;
        g[1] = if self.flip { -g2 } else { g2 };
    }
}

fn elements(m: usize) -> Vec<Element> {
    let mut out = Vec::with_capacity(2 * m);
    for flip in [false, true] {
        for j in 0..m {
            let (sin, cos) = (2.0 * PI * j as f64 / m as f64).sin_cos();
            out.push(Element { cos, sin, flip });
        }
    }
    out
}

/// The `2m` images of `y` under the group.
pub fn dihedral_images(y: &[f64], m: usize) -> Vec<Vec<f64>> {
    elements(m)
        .iter()
        .map(|e| {
            let mut out = vec![0.0; y.len()];
            e.apply(y, &mut out);
            out
        })
        .collect()
}

/// `g⋆(y) = (1/2m) Σ_G g(G y)`.
pub struct Symmetrized<F> {
    inner: F,
    group: Vec<Element>,
}

pub fn symmetrize<F: Field>(f: F, m: usize) -> Symmetrized<F> {
    assert!(m >= 1, "group order must be positive");
    Symmetrized {
        inner: f,
        group: elements(m),
    }
}

impl<F: Field> Field for Symmetrized<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, y: &[f64]) -> f64 {
        let mut buf = vec![0.0; y.len()];
        let mut acc = 0.0;
        for e in &self.group {
            e.apply(y, &mut buf);
            acc += self.inner.value(&buf);
        }
        acc / self.group.len() as f64
    }

    fn jet(&self, y: &[f64]) -> Option<Jet> {
        let mut buf = vec![0.0; y.len()];
        let mut acc = Jet::zero(y.len());
        for e in &self.group {
            e.apply(y, &mut buf);
            let mut j = self.inner.jet(&buf)?;
            e.pull_back(&mut j.gradient);
            acc.add_assign(&j);
        }
        let k = self.group.len() as f64;
        acc.value /= k;
        acc.laplacian /= k;
        acc.gradient.iter_mut().for_each(|g| *g /= k);
        Some(acc)
    }
}
