//! Browser bindings: potential audit, μ* scaling and the bubble profile.
//! Results cross the boundary as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use bubblekit::energy::{bubble_profile, compute_constants};
use bubblekit::numerics::{QuadratureSpec, SectorFace};
use bubblekit::potential::{
    audit, builtin_example_potential, AuditOptions, AuditReport, PolynomialPotential, Potential, Symmetry,
};
use bubblekit::reduction::{dyadic_range, scaling_study, ScalingStudyResult};

fn potential(spec: &str, dim: usize) -> bubblekit::Result<Box<dyn Potential>> {
    if spec.trim() == "builtin:appendix_d" {
        Ok(Box::new(builtin_example_potential(dim)?))
    } else {
        Ok(Box::new(PolynomialPotential::parse(spec, dim, Symmetry::FourDim, 1)?))
    }
}

fn to_js<T: Serialize>(r: bubblekit::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[derive(Serialize)]
struct AuditView {
    passed: bool,
    report: AuditReport,
}

pub fn audit_report(spec: &str, dim: usize, minus_face: bool) -> bubblekit::Result<AuditReport> {
    let p = potential(spec, dim)?;
    let opts = AuditOptions {
        face: if minus_face { SectorFace::Minus } else { SectorFace::Plus },
        ..AuditOptions::default()
    };
    audit(p.as_ref(), &opts)
}

/// Audit a potential radial in (y1..y4); `spec` is `builtin:appendix_d` or `V = ...`.
#[wasm_bindgen(js_name = auditPotential)]
pub fn audit_potential(spec: &str, dim: usize, minus_face: bool) -> Result<String, JsError> {
    to_js(audit_report(spec, dim, minus_face).map(|report| AuditView {
        passed: report.passed(),
        report,
    }))
}

pub fn scaling_result(spec: &str, dim: usize, n_min: usize, n_max: usize) -> bubblekit::Result<ScalingStudyResult> {
    let p = potential(spec, dim)?;
    let report = audit(p.as_ref(), &AuditOptions::default())?;
    if !report.passed() {
        return Err(bubblekit::Error::InvalidParameter("potential does not pass the audit".into()));
    }
    let k = compute_constants(dim, &QuadratureSpec::radial_gauss(48))?;
    scaling_study(&dyadic_range(n_min, n_max), &k, p.as_ref(), &report.critical_point)
}

/// μ* for n = n_min, 2n_min, ..., n_max at the audited critical point, with the fitted exponent.
#[wasm_bindgen(js_name = scalingStudy)]
pub fn scaling(spec: &str, dim: usize, n_min: usize, n_max: usize) -> Result<String, JsError> {
    to_js(scaling_result(spec, dim, n_min, n_max))
}

/// `U_{0,λ}(r)` on `samples` points of `[0, r_max]`.
#[wasm_bindgen(js_name = bubbleProfile)]
pub fn profile(dim: usize, lambda: f64, r_max: f64, samples: usize) -> Vec<f64> {
    let k = samples.max(2);
    let scale = lambda.powf((dim as f64 - 2.0) / 2.0);
    (0..k)
        .map(|i| {
            let r = r_max * i as f64 / (k - 1) as f64;
            scale * bubble_profile(dim, lambda * r)
        })
        .collect()
}
