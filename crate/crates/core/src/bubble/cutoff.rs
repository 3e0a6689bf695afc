use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Jet;

/// Cut-off around the set `{(r, y*) = (r₀, y₀*)}`, where `r` is the norm of
/// the first `radial_dims` coordinates and `y*` the remaining ones.
///
/// Equal to 1 for distance ≤ δ, 0 for distance ≥ 2δ, quintic smoothstep in
/// between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub r0: f64,
    pub tail0: Vec<f64>,
    pub delta: f64,
    pub radial_dims: usize,
}

impl CutoffSpec {
    pub fn new(r0: f64, tail0: Vec<f64>, delta: f64) -> Result<Self> {
        Self::with_radial_dims(r0, tail0, delta, 4)
    }

    pub fn with_radial_dims(r0: f64, tail0: Vec<f64>, delta: f64, radial_dims: usize) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidParameter("cut-off anchor needs r0 > 0".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("cut-off radius must be positive".into()));
        }
        if radial_dims < 1 {
            return Err(Error::InvalidParameter("cut-off needs a radial block".into()));
        }
        Ok(CutoffSpec {
            r0,
            tail0,
            delta,
            radial_dims,
        })
    }

    pub fn dim(&self) -> usize {
        self.radial_dims + self.tail0.len()
    }

    pub fn outer_radius(&self) -> f64 {
        2.0 * self.delta
    }

    /// Distance of `y` from the anchor set in the (r, y*) variables.
    pub fn distance(&self, y: &[f64]) -> f64 {
        let k = self.radial_dims;
        let r = y[..k].iter().map(|v| v * v).sum::<f64>().sqrt();
        let tail: f64 = y[k..].iter().zip(&self.tail0).map(|(a, b)| (a - b) * (a - b)).sum();
        ((r - self.r0) * (r - self.r0) + tail).sqrt()
    }
}

/// `S(s) = 6s⁵ - 15s⁴ + 10s³` and its first two derivatives, clamped to [0, 1].
pub fn smoothstep(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let s2 = s * s;
        (
            s2 * s * (10.0 + s * (6.0 * s - 15.0)),
            30.0 * s2 * (s - 1.0) * (s - 1.0),
            60.0 * s * (2.0 * s - 1.0) * (s - 1.0),
        )
    }
}

pub fn smooth_cutoff(c: &CutoffSpec, y: &[f64]) -> Jet {
    let dim = y.len();
    let d = c.distance(y);
    let s = (d - c.delta) / c.delta;
    let (sv, s1, s2) = smoothstep(s);
    if s1 == 0.0 && s2 == 0.0 {
        return Jet {
            value: 1.0 - sv,
            gradient: vec![0.0; dim],
            laplacian: 0.0,
        };
    }
    // ζ = h(d), h' = -S'/δ, h'' = -S''/δ². On the transition annulus d > δ
    // and r > r₀ - 2δ > 0 by construction of the anchor.
    let k = c.radial_dims;
    let h1 = -s1 / c.delta;
    let h2 = -s2 / (c.delta * c.delta);
    let r = y[..k].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut gradient = Vec::with_capacity(dim);
    for v in &y[..k] {
        gradient.push(h1 * (r - c.r0) / d * v / r);
    }
    for (v, t) in y[k..].iter().zip(&c.tail0) {
        gradient.push(h1 * (v - t) / d);
    }
    let lap_d = (dim - k) as f64 / d + (k as f64 - 1.0) * (r - c.r0) / (r * d);
    Jet {
        value: 1.0 - sv,
        gradient,
        laplacian: h2 + h1 * lap_d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{finite_difference_jet, FnField};

    fn spec() -> CutoffSpec {
        CutoffSpec::new(1.0, vec![0.5, -0.5, 0.0], 0.1).unwrap()
    }

    fn at_distance(c: &CutoffSpec, d: f64) -> Vec<f64> {
        // Move along r from the anchor.
        let mut y = vec![0.0; c.dim()];
        y[0] = c.r0 + d;
        y[c.radial_dims..].copy_from_slice(&c.tail0);
        y
    }

    #[test]
    fn plateau_support_and_midpoint() {
        let c = spec();
        let inside = smooth_cutoff(&c, &at_distance(&c, 0.05));
        assert_eq!(inside.value, 1.0);
        assert!(inside.gradient.iter().all(|&g| g == 0.0));
        assert_eq!(smooth_cutoff(&c, &at_distance(&c, 0.3)).value, 0.0);
        assert!((smooth_cutoff(&c, &at_distance(&c, 0.15)).value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn monotone_profile() {
        let c = spec();
        let mut prev = 1.0;
        for i in 0..=200 {
            let v = smooth_cutoff(&c, &at_distance(&c, 0.1 + 0.1 * i as f64 / 200.0)).value;
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let c = spec();
        let f = FnField::new(c.dim(), |y: &[f64]| smooth_cutoff(&c, y).value);
        for y in [
            [0.9, 0.4, 0.3, 0.2, 0.55, -0.45, 0.05],
            [0.3, -0.6, 0.7, 0.1, 0.47, -0.52, 0.03],
            [1.05, 0.1, -0.2, 0.1, 0.5, -0.4, -0.06],
        ] {
            let exact = smooth_cutoff(&c, &y);
            let fd = finite_difference_jet(&f, &y, 1e-5);
            for (a, b) in exact.gradient.iter().zip(&fd.gradient) {
                assert!((a - b).abs() < 1e-6 * 10.0, "{a} vs {b}");
            }
            assert!((exact.laplacian - fd.laplacian).abs() < 1e-2, "{} vs {}", exact.laplacian, fd.laplacian);
        }
    }

    #[test]
    fn smoothstep_is_c2_at_the_joins() {
        let (v0, d0, s0) = smoothstep(1e-12);
        let (v1, d1, s1) = smoothstep(1.0 - 1e-12);
        assert!(v0 < 1e-30 && d0 < 1e-20 && s0.abs() < 1e-9);
        assert!((v1 - 1.0).abs() < 1e-14 && d1 < 1e-20 && s1.abs() < 1e-9);
    }
}
