use std::sync::Arc;

use serde::{Deserialize, Serialize};

use bubblekit::bubble::{CutoffSpec, TowerConfig};
use bubblekit::energy::{compute_constants, critical_mu, ExpansionConstants};
use bubblekit::numerics::{QuadratureSpec, SectorFace};
use bubblekit::pohozaev::{IdentityCheck, Preset};
use bubblekit::potential::{
    audit as run_audit, builtin_example_potential, monotonicity_obstruction, AmbientPotential, AuditOptions,
    AuditReport, ObstructionVerdict, PolynomialPotential, Potential, Symmetry,
};
use bubblekit::reduction::{
    dyadic_range, find_reduced_critical_point, residual_decay_study, scaling_study, CriticalPointResult,
    MRingModel, ResidualCloud, ResidualDecayResult, ScalingStudyResult, SearchOptions,
};

use crate::config::RunConfig;
use crate::output::{display, fmt_f64, Csv, OutDir, Summary};
use crate::{CliError, Loaded};

const BUILTIN: &str = "builtin:appendix_d";

fn summary<T>(command: &str, config: &RunConfig, result: T) -> Summary<T> {
    Summary {
        command: command.to_string(),
        config: config.clone(),
        result,
    }
}

fn symmetry(c: &RunConfig) -> Result<Symmetry, CliError> {
    match c.potential.symmetry.as_str() {
        "four_dim" => Ok(Symmetry::FourDim),
        "two_dim" => Ok(Symmetry::TwoDim),
        other => Err(CliError::Usage(format!("unknown symmetry `{other}` (expected four_dim or two_dim)"))),
    }
}

fn face(c: &RunConfig) -> Result<SectorFace, CliError> {
    match c.audit.face.as_str() {
        "plus" => Ok(SectorFace::Plus),
        "minus" => Ok(SectorFace::Minus),
        other => Err(CliError::Usage(format!("unknown face `{other}` (expected plus or minus)"))),
    }
}

pub fn build_potential(l: &Loaded) -> Result<Arc<dyn Potential>, CliError> {
    let c = &l.config;
    let sym = symmetry(c)?;
    if c.potential.spec.trim() == BUILTIN {
        if sym != Symmetry::FourDim {
            return Err(CliError::Usage(format!("{BUILTIN} is radial in the first four coordinates")));
        }
        return Ok(Arc::new(builtin_example_potential(c.run.dim)?));
    }
    let line = match (&l.text, l.potential_from_flag) {
        (Some(t), false) => RunConfig::locate(t, "potential", "spec").unwrap_or(1),
        _ => 1,
    };
    Ok(Arc::new(PolynomialPotential::parse(&c.potential.spec, c.run.dim, sym, line)?))
}

fn audit_options(c: &RunConfig) -> Result<AuditOptions, CliError> {
    Ok(AuditOptions {
        guess: c.potential.guess.clone(),
        m: c.audit.m,
        face: face(c)?,
        ..AuditOptions::default()
    })
}

/// The audit report, or a refusal when the potential fails it.
fn audited(l: &Loaded, p: &dyn Potential) -> Result<AuditReport, CliError> {
    let report = run_audit(p, &audit_options(&l.config)?)?;
    if !report.passed() {
        return Err(CliError::Check(format!(
            "refusing: potential `{}` does not pass the audit (run `bubblekit audit` for details)",
            report.potential
        )));
    }
    Ok(report)
}

fn constants_for(c: &RunConfig) -> Result<(QuadratureSpec, ExpansionConstants), CliError> {
    let spec = c.quadrature_spec()?;
    let k = compute_constants(c.run.dim, &spec)?;
    Ok((spec, k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub passed: bool,
    pub report: AuditReport,
    /// Sign pattern of `d(r²V)/dr` along the tail of the critical point.
    pub monotonicity: ObstructionVerdict,
}

fn fmt_vec(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("({})", cells.join(", "))
}

fn print_table(r: &AuditReport) {
    println!("potential        {}", r.potential);
    println!("dimension        {}", r.dimension);
    println!("critical point   {}", fmt_vec(&r.critical_point));
    println!("r0               {:.10}", r.critical_point[0]);
    println!("|grad|           {:.3e} after {} Newton steps", r.gradient_norm, r.newton_iterations);
    println!("V at cp          {:.10}", r.v_at_cp);
    println!("eigenvalues      {}", fmt_vec(&r.eigenvalues));
    match r.local_degree {
        Some(d) => println!("local degree     {d}"),
        None => println!("local degree     undefined"),
    }
    for f in &r.faces {
        let mark = if f.face == r.face { "*" } else { " " };
        println!(
            "det_A {:<5} {mark}   {:.6e}  (threshold {:.3e}, {})",
            f.face.as_str(),
            f.det,
            f.threshold,
            if f.passes { "ok" } else { "below" }
        );
    }
    println!("assumption V     {}", if r.assumptions_passed.v { "pass" } else { "fail" });
    println!(
        "assumption V~    {} ({}, m = {})",
        if r.assumptions_passed.tilde_v { "pass" } else { "fail" },
        r.variant.as_str(),
        r.m
    );
    for n in &r.notes {
        println!("note             {n}");
    }
}

pub fn audit(l: &Loaded) -> Result<(), CliError> {
    let c = &l.config;
    let p = build_potential(l)?;
    let report = run_audit(p.as_ref(), &audit_options(c)?)?;
    let r0 = report.critical_point[0];
    let monotonicity =
        monotonicity_obstruction(p.as_ref(), &report.critical_point[1..], (0.5 * r0, 2.0 * r0), 64, 1e-12);
    let out = OutDir::create(&c.run.out)?;
    out.write_config(c)?;
    print_table(&report);
    let passed = report.passed();
    let path = out.write_json(
        "audit.json",
        &summary(
            "audit",
            c,
            AuditResult {
                passed,
                report,
                monotonicity,
            },
        ),
    )?;
    println!("wrote {}", display(&path));
    if passed {
        Ok(())
    } else {
        Err(CliError::Check("audit failed".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub critical_point: Vec<f64>,
    pub constants: ExpansionConstants,
    pub study: ScalingStudyResult,
}

pub fn scaling(l: &Loaded) -> Result<(), CliError> {
    let c = &l.config;
    let p = build_potential(l)?;
    let report = audited(l, p.as_ref())?;
    let (_, constants) = constants_for(c)?;
    let ns = dyadic_range(c.scaling.n_min, c.scaling.n_max);
    let study = scaling_study(&ns, &constants, p.as_ref(), &report.critical_point)?;
    let mut csv = Csv::new(&["n", "mu_star"]);
    for (n, mu) in study.n_values.iter().zip(&study.mu_star) {
        csv.row([n.to_string(), fmt_f64(*mu)]);
    }
    let out = OutDir::create(&c.run.out)?;
    out.write_config(c)?;
    out.write("scaling.csv", &csv.finish())?;
    println!(
        "fitted exponent {:.6} target {:.6} (N = {}, n = {}..{}, rms {:.2e})",
        study.fitted_exponent,
        study.target_exponent,
        c.run.dim,
        c.scaling.n_min,
        c.scaling.n_max,
        study.residual_of_fit
    );
    let result = ScalingResult {
        critical_point: report.critical_point,
        constants,
        study,
    };
    out.write_json("scaling.json", &summary("scaling", c, result))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRow {
    pub n: usize,
    pub point: CriticalPointResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedResult {
    pub audited_point: Vec<f64>,
    pub search: SearchOptions,
    pub rows: Vec<ReducedRow>,
}

pub fn reduced(l: &Loaded) -> Result<(), CliError> {
    let c = &l.config;
    let p = build_potential(l)?;
    let report = audited(l, p.as_ref())?;
    let (_, constants) = constants_for(c)?;
    let search = SearchOptions::around(report.critical_point[0]);
    let ns = dyadic_range(c.scaling.n_min, c.scaling.n_max);
    if ns.is_empty() {
        return Err(CliError::Usage("empty n range".into()));
    }
    let rows = ns
        .iter()
        .map(|&n| {
            find_reduced_critical_point(n, &constants, p.as_ref(), &report.critical_point, search)
                .map(|point| ReducedRow { n, point })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tail_len = p.tail_len();
    let mut header = vec!["n".to_string(), "t_star".to_string()];
    header.extend((1..=tail_len).map(|k| format!("ystar_{k}")));
    header.extend(["mu_star", "grad_norm", "classification"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header);
    for r in &rows {
        let mut cells = vec![r.n.to_string(), fmt_f64(r.point.t)];
        cells.extend(r.point.tail.iter().map(|v| fmt_f64(*v)));
        cells.push(fmt_f64(r.point.mu));
        cells.push(fmt_f64(r.point.gradient_norm));
        cells.push(r.point.classification.as_str().to_string());
        csv.row(cells);
    }
    let out = OutDir::create(&c.run.out)?;
    out.write_config(c)?;
    out.write("reduced.csv", &csv.finish())?;
    for r in &rows {
        println!(
            "n = {:<6} t* = {:.10}  mu* = {:.6e}  {}",
            r.n,
            r.point.t,
            r.point.mu,
            r.point.classification.as_str()
        );
    }
    let result = ReducedResult {
        audited_point: report.critical_point,
        search,
        rows,
    };
    out.write_json("reduced.json", &summary("reduced", c, result))?;
    Ok(())
}

pub fn constants(l: &Loaded) -> Result<(), CliError> {
    let c = &l.config;
    let (_, k) = constants_for(c)?;
    let mut csv = Csv::new(&["name", "dim", "value", "error_estimate", "fingerprint"]);
    for (name, v, e) in [("A1", k.a1, k.a1_error), ("A2", k.a2, k.a2_error), ("A3", k.a3, k.a3_error)] {
        csv.row([name.to_string(), k.dim.to_string(), fmt_f64(v), fmt_f64(e), k.fingerprint.clone()]);
        println!("{name} = {v:.15e}  (error {e:.2e})");
    }
    println!("quadrature {}", k.fingerprint);
    let out = OutDir::create(&c.run.out)?;
    out.write_config(c)?;
    out.write("constants.txt", &k.to_cache_text())?;
    out.write("constants.csv", &csv.finish())?;
    out.write_json("constants.json", &summary("constants", c, k))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualResult {
    pub tower: TowerConfig,
    /// True when μ was set to the critical scale μ* of the n-ring.
    pub mu_auto: bool,
    pub cloud: ResidualCloud,
    pub study: ResidualDecayResult,
}

pub fn residual(l: &Loaded) -> Result<(), CliError> {
    let c = &l.config;
    let p = build_potential(l)?;
    if p.symmetry() != Symmetry::FourDim {
        return Err(CliError::Usage("the two-ring residual needs a potential radial in (y1, y2, y3, y4)".into()));
    }
    let report = audited(l, p.as_ref())?;
    let x = &report.critical_point;
    let r0 = x[0];
    let tail = x[1..].to_vec();
    let (mu, mu_auto) = match c.ring.mu {
        Some(mu) => (mu, false),
        None => {
            let (_, k) = constants_for(c)?;
            (critical_mu(r0, &tail, c.ring.n, &k, p.as_ref())?, true)
        }
    };
    let delta = c.ring.delta.unwrap_or(0.25 * r0);
    let tower = TowerConfig {
        m: c.ring.m,
        r_bar: r0,
        lambda: c.ring.lambda,
        n: c.ring.n,
        t: r0,
        mu,
        tail: tail.clone(),
        cutoff: CutoffSpec::new(r0, tail, delta)?,
        n_phase: 0.0,
    };
    if c.residual.mu_ladder < 2 {
        return Err(CliError::Usage("mu_ladder must be at least 2".into()));
    }
    let multipliers: Vec<f64> = (0..c.residual.mu_ladder).map(|k| 2f64.powi(k as i32)).collect();
    let cloud = ResidualCloud {
        far_radius: c.residual.far_radius,
        ..ResidualCloud::default()
    };
    let v = AmbientPotential::new(p.clone());
    let study = residual_decay_study(&tower, &multipliers, &v, MRingModel::Ansatz, cloud)?;
    let mut csv = Csv::new(&["multiplier", "mu", "norm"]);
    for ((k, mu), n) in study.multipliers.iter().zip(&study.mu_values).zip(&study.norms) {
        csv.row([fmt_f64(*k), fmt_f64(*mu), fmt_f64(*n)]);
    }
    let out = OutDir::create(&c.run.out)?;
    out.write_config(c)?;
    out.write("residual.csv", &csv.finish())?;
    println!(
        "slope {:.4}  strictly decreasing {}  (N = {}, n = {}, mu0 = {:.4})",
        study.fitted_slope, study.strictly_decreasing, c.run.dim, c.ring.n, mu
    );
    let result = ResidualResult {
        tower,
        mu_auto,
        cloud,
        study,
    };
    out.write_json("residual.json", &summary("residual", c, result))?;
    Ok(())
}

pub fn pohozaev(l: &Loaded) -> Result<(), CliError> {
    let c = &l.config;
    let preset = Preset::parse(&c.pohozaev.preset).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown preset `{}` (expected gaussian-ball-3d or bubble-ball-5d)",
            c.pohozaev.preset
        ))
    })?;
    let order = c.pohozaev.order.unwrap_or(preset.default_order());
    let checks: Vec<IdentityCheck> = preset.run(&QuadratureSpec::tensor_gauss(order))?;
    let mut csv = Csv::new(&["identity", "domain", "N", "order", "lhs", "rhs", "correction", "discrepancy"]);
    for k in &checks {
        csv.row([
            k.identity.as_str().to_string(),
            k.domain.clone(),
            k.dim.to_string(),
            k.order.to_string(),
            fmt_f64(k.lhs),
            fmt_f64(k.rhs),
            fmt_f64(k.residual_correction),
            fmt_f64(k.discrepancy),
        ]);
        println!(
            "{:<12} discrepancy {:.3e}  relative {:.3e}  scaled {:.3e}",
            k.identity.as_str(),
            k.discrepancy,
            k.relative_discrepancy,
            k.scaled_discrepancy
        );
    }
    let out = OutDir::create(&c.run.out)?;
    out.write_config(c)?;
    out.write("pohozaev.csv", &csv.finish())?;
    out.write_json("pohozaev.json", &summary("pohozaev", c, checks))?;
    Ok(())
}
