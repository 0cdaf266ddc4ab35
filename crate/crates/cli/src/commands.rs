//! One function per command. Each writes its CSV artifacts and returns the
//! body of `result.json`.

use std::io::Write;
use std::sync::Arc;

use distortion_core::convergence::LscReport;
use distortion_core::fields::{fmt_f64, FiniteDistortionReport};
use distortion_core::functionals::{
    concavity_probe, convexity_probe, convexity_probe_fn, monotone_truncation_check, polyconvex_probe, ConcavityReport, ConvexityReport,
    MonotoneReport, PolyconvexReport, ProbeBox, ProbeSettings,
};
use distortion_core::hopf::{l1_norm, sup_gap, HolomorphyResidual};
use distortion_core::minimize::{MinimizeStatus, SweepEntry};
use distortion_core::sequences::SequenceFacts;
use distortion_core::{
    ahlfors_hopf, finite_distortion_report, generate, holomorphy_residual, jacobian_area_identity, lsc_check, minimize_energy,
    minimize_from, radon_riesz_diagnose, sample_analytic, truncation_sweep, wirtinger_derivatives, BoundaryData, ConvergenceReport, Domain,
    Error, Family, FunctionalSpec, HopfWeight, MappingField, Mesh, MinimizeResult, Result, SequenceHandle, Truncation, Verdict,
};
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::output::OutDir;

/// A finished command: the result body and, for stalled runs, the reason.
pub struct Finished {
    pub body: serde_json::Value,
    /// Set when the run completed but ended in a numerical failure.
    pub numerical_failure: Option<String>,
}

fn finished<T: Serialize>(body: &T, numerical_failure: Option<String>) -> Result<Finished> {
    Ok(Finished { body: serde_json::to_value(body)?, numerical_failure })
}

pub fn run(cfg: &RunConfig, mesh: Option<Arc<Mesh>>, out: &mut OutDir) -> Result<Finished> {
    match cfg.command {
        Command::Mesh => mesh_cmd(mesh.expect("mesh commands build a mesh"), out),
        Command::Minimize => minimize_cmd(cfg, mesh.expect("minimize builds a mesh"), out),
        Command::Sweep => sweep_cmd(cfg, mesh.expect("sweep builds a mesh"), out),
        Command::Diagnose => diagnose_cmd(cfg, mesh.expect("diagnose builds a mesh"), out),
        Command::Hopf => hopf_cmd(cfg, mesh.expect("hopf builds a mesh"), out),
        Command::Oracle => oracle_cmd(cfg),
    }
}

fn csv_err(e: std::io::Error) -> Error {
    Error::Io(e)
}

fn write_mapping_csv(field: &MappingField, path: &std::path::Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "node,x,y,re,im").map_err(csv_err)?;
    for (v, (z, f)) in field.mesh().nodes().iter().zip(field.values()).enumerate() {
        writeln!(w, "{v},{},{},{},{}", fmt_f64(z.re), fmt_f64(z.im), fmt_f64(f.re), fmt_f64(f.im)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MeshSummary {
    nodes: usize,
    triangles: usize,
    boundary_nodes: usize,
    level: u32,
    domain: Domain,
    area: f64,
    mesh_size: f64,
}

fn mesh_summary(mesh: &Mesh) -> MeshSummary {
    MeshSummary {
        nodes: mesh.node_count(),
        triangles: mesh.triangle_count(),
        boundary_nodes: mesh.boundary_nodes().len(),
        level: mesh.level(),
        domain: mesh.domain(),
        area: mesh.total_area(),
        mesh_size: mesh.mesh_size(),
    }
}

fn mesh_cmd(mesh: Arc<Mesh>, out: &mut OutDir) -> Result<Finished> {
    mesh.write_json(&out.artifact("mesh.json"))?;
    finished(&mesh_summary(&mesh), None)
}

#[derive(Serialize)]
struct MinimizeSummary {
    mesh: MeshSummary,
    functional: FunctionalSpec,
    boundary: BoundaryData,
    energy: f64,
    status: MinimizeStatus,
    iterations: usize,
    final_grad_norm: f64,
    min_jacobian: f64,
    jacobian_floor: f64,
    /// Largest nodal distance to the identity map.
    max_distance_from_identity: f64,
    area_integral: f64,
    distortion: FiniteDistortionReport,
}

fn stall_reason(result: &MinimizeResult, what: &str) -> Option<String> {
    (result.status == MinimizeStatus::Stalled).then(|| {
        let last = result.trace.last().expect("trace has the initial row");
        format!("{what}: line search stalled at iteration {} with gradient norm {:e}", last.iteration, last.grad_norm)
    })
}

fn summarize_minimizer(mesh: &Arc<Mesh>, spec: &FunctionalSpec, boundary: &BoundaryData, result: &MinimizeResult) -> MinimizeSummary {
    let derived = wirtinger_derivatives(&result.field);
    let last = result.trace.last().expect("trace has the initial row");
    MinimizeSummary {
        mesh: mesh_summary(mesh),
        functional: spec.clone(),
        boundary: boundary.clone(),
        energy: result.energy,
        status: result.status,
        iterations: last.iteration,
        final_grad_norm: last.grad_norm,
        min_jacobian: derived.min_jacobian().1,
        jacobian_floor: result.jacobian_floor,
        max_distance_from_identity: result.field.max_distance(&MappingField::identity(mesh.clone())),
        area_integral: jacobian_area_identity(&derived).integral,
        distortion: finite_distortion_report(&derived),
    }
}

fn minimize_cmd(cfg: &RunConfig, mesh: Arc<Mesh>, out: &mut OutDir) -> Result<Finished> {
    let spec = cfg.functional()?;
    let boundary = cfg.boundary();
    let result = minimize_energy(spec, mesh.clone(), &boundary, &cfg.minimize_config())?;
    result.write_trace_csv(std::fs::File::create(out.artifact("trace.csv"))?)?;
    write_mapping_csv(&result.field, &out.artifact("mapping.csv"))?;
    wirtinger_derivatives(&result.field).write_csv_file(&out.artifact("elements.csv"))?;
    let summary = summarize_minimizer(&mesh, spec, &boundary, &result);
    finished(&summary, stall_reason(&result, "minimize"))
}

#[derive(Serialize)]
struct SweepRow {
    n: u32,
    energy: f64,
    status: MinimizeStatus,
    iterations: usize,
    final_grad_norm: f64,
    min_jacobian: f64,
    /// `L^1` norm of the truncated Hopf quantity.
    hopf_l1: f64,
    /// Sup over interior triangles of the change from the previous `N`.
    hopf_cauchy_gap: Option<f64>,
    holomorphy: HolomorphyResidual,
}

#[derive(Serialize)]
struct SweepSummary {
    mesh: MeshSummary,
    p: f64,
    template: FunctionalSpec,
    boundary: BoundaryData,
    entries: Vec<SweepRow>,
}

fn run_sweep(cfg: &RunConfig, mesh: &Arc<Mesh>) -> Result<Vec<SweepEntry>> {
    let sweep = cfg.sweep()?;
    truncation_sweep(sweep.p, &sweep.n_list, &cfg.sweep_template(), mesh.clone(), &cfg.boundary(), &cfg.minimize_config())
}

fn sweep_rows(p: f64, entries: &[SweepEntry], mesh: &Mesh, out: Option<&mut OutDir>) -> Result<Vec<SweepRow>> {
    let interior = mesh.interior_triangles();
    let mut rows = Vec::with_capacity(entries.len());
    let mut fields = Vec::with_capacity(entries.len());
    for e in entries {
        let derived = wirtinger_derivatives(&e.result.field);
        let psi = ahlfors_hopf(&derived, p, Truncation::Finite(e.n), HopfWeight::None)?;
        let last = e.result.trace.last().expect("trace has the initial row");
        rows.push(SweepRow {
            n: e.n,
            energy: e.result.energy,
            status: e.result.status,
            iterations: last.iteration,
            final_grad_norm: last.grad_norm,
            min_jacobian: derived.min_jacobian().1,
            hopf_l1: l1_norm(&psi),
            hopf_cauchy_gap: fields.last().map(|prev| sup_gap(prev, &psi, &interior)),
            holomorphy: holomorphy_residual(&psi),
        });
        fields.push(psi);
    }
    if let Some(out) = out {
        for (e, psi) in entries.iter().zip(&fields) {
            e.result.write_trace_csv(std::fs::File::create(out.artifact(&format!("trace_N{}.csv", e.n)))?)?;
            psi.write_csv_file(&out.artifact(&format!("hopf_N{}.csv", e.n)))?;
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(out.artifact("sweep.csv"))?);
        writeln!(w, "N,energy,status,iterations,hopf_l1,hopf_cauchy_gap,holomorphy_l1").map_err(csv_err)?;
        for r in &rows {
            let gap = r.hopf_cauchy_gap.map_or(String::new(), fmt_f64);
            let status = serde_json::to_value(r.status)?;
            writeln!(
                w,
                "{},{},{},{},{},{gap},{}",
                r.n,
                fmt_f64(r.energy),
                status.as_str().unwrap_or_default(),
                r.iterations,
                fmt_f64(r.hopf_l1),
                fmt_f64(r.holomorphy.l1)
            )
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(rows)
}

fn sweep_stalls(entries: &[SweepEntry]) -> Option<String> {
    let reasons: Vec<String> = entries.iter().filter_map(|e| stall_reason(&e.result, &format!("N = {}", e.n))).collect();
    (!reasons.is_empty()).then(|| reasons.join("; "))
}

fn sweep_cmd(cfg: &RunConfig, mesh: Arc<Mesh>, out: &mut OutDir) -> Result<Finished> {
    let sweep = cfg.sweep()?;
    let entries = run_sweep(cfg, &mesh)?;
    let rows = sweep_rows(sweep.p, &entries, &mesh, Some(out))?;
    let summary =
        SweepSummary { mesh: mesh_summary(&mesh), p: sweep.p, template: cfg.sweep_template(), boundary: cfg.boundary(), entries: rows };
    finished(&summary, sweep_stalls(&entries))
}

#[derive(Serialize)]
struct DiagnoseSummary {
    mesh: MeshSummary,
    source: &'static str,
    verdict: Verdict,
    /// Last member energy minus the limit energy.
    gap: f64,
    lsc: LscReport,
    report: ConvergenceReport,
    /// Per-member minimiser summaries when the sequence comes from a sweep.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sweep: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

/// Sweep minimisers as a sequence whose limit minimises the full exponential.
fn sweep_sequence(cfg: &RunConfig, mesh: &Arc<Mesh>) -> Result<(SequenceHandle, FunctionalSpec, Vec<SweepRow>, Vec<String>)> {
    let sweep = cfg.sweep()?;
    let template = cfg.sweep_template();
    let entries = run_sweep(cfg, mesh)?;
    let mut limit_spec = template.clone();
    limit_spec.family = Family::ExpP { p: sweep.p };
    let start = entries.last().map(|e| e.result.field.clone()).expect("n_list is non-empty");
    let limit = minimize_from(&limit_spec, start, &cfg.minimize_config())?;
    let mut warnings: Vec<String> = sweep_stalls(&entries).into_iter().collect();
    warnings.extend(stall_reason(&limit, "limit"));
    let rows = sweep_rows(sweep.p, &entries, mesh, None)?;
    let specs = entries
        .iter()
        .map(|e| {
            let mut s = template.clone();
            s.family = Family::TruncExp { p: sweep.p, n: e.n };
            s
        })
        .collect();
    let mut seq = SequenceHandle::new(entries.into_iter().map(|e| e.result.field).collect(), limit.field)?.with_member_specs(specs)?;
    seq.indices = sweep.n_list.clone();
    seq.facts =
        SequenceFacts { description: "truncation sweep minimisers, limit minimises the full exponential".into(), ..Default::default() };
    Ok((seq, limit_spec, rows, warnings))
}

fn diagnose_cmd(cfg: &RunConfig, mesh: Arc<Mesh>, out: &mut OutDir) -> Result<Finished> {
    let params = cfg.diagnose()?;
    let (seq, spec, sweep, warnings, source) = match &cfg.recipe {
        Some(recipe) => (generate(recipe, mesh.clone())?, cfg.functional()?.clone(), Vec::new(), Vec::new(), "recipe"),
        None => {
            let (seq, spec, rows, warnings) = sweep_sequence(cfg, &mesh)?;
            (seq, spec, rows, warnings, "sweep")
        }
    };
    let report = radon_riesz_diagnose(&spec, &seq, params)?;
    let lsc = lsc_check(&spec, &seq);
    report.write_series_csv_file(&out.artifact("series.csv"))?;
    let summary = DiagnoseSummary {
        mesh: mesh_summary(&mesh),
        source,
        verdict: report.verdict,
        gap: report.hypotheses.energy_convergence.gap,
        lsc,
        report,
        sweep,
        warnings,
    };
    finished(&summary, None)
}

#[derive(Serialize)]
struct HopfSummary {
    mesh: MeshSummary,
    p: f64,
    truncation: Truncation,
    weight: HopfWeight,
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimizer: Option<MinimizeSummary>,
    l1: f64,
    flagged_triangles: usize,
    holomorphy: HolomorphyResidual,
}

fn hopf_cmd(cfg: &RunConfig, mesh: Arc<Mesh>, out: &mut OutDir) -> Result<Finished> {
    let (p, truncation, weight) = cfg.hopf_settings();
    let map = cfg.hopf.as_ref().and_then(|h| h.map.clone());
    let (field, minimizer, stall) = match map {
        Some(map) => (sample_analytic(mesh.clone(), &map)?, None, None),
        None => {
            let spec = cfg.functional()?;
            let boundary = cfg.boundary();
            let result = minimize_energy(spec, mesh.clone(), &boundary, &cfg.minimize_config())?;
            result.write_trace_csv(std::fs::File::create(out.artifact("trace.csv"))?)?;
            let summary = summarize_minimizer(&mesh, spec, &boundary, &result);
            let stall = stall_reason(&result, "hopf minimiser");
            (result.field, Some(summary), stall)
        }
    };
    write_mapping_csv(&field, &out.artifact("mapping.csv"))?;
    let psi = ahlfors_hopf(&wirtinger_derivatives(&field), p, truncation, weight)?;
    psi.write_csv_file(&out.artifact("hopf.csv"))?;
    let summary = HopfSummary {
        mesh: mesh_summary(&mesh),
        p,
        truncation,
        weight,
        source: if minimizer.is_some() { "minimizer" } else { "map" },
        minimizer,
        l1: l1_norm(&psi),
        flagged_triangles: psi.flagged_count(),
        holomorphy: holomorphy_residual(&psi),
    };
    finished(&summary, stall)
}

#[derive(Serialize)]
struct FamilyConvexity {
    functional: FunctionalSpec,
    /// Whether the `Phi y^s` condition applies; it does not for the Dirichlet integrand.
    weighted_applicable: bool,
    ok: bool,
    report: ConvexityReport,
}

#[derive(Serialize)]
struct OracleSummary {
    samples: usize,
    s: f64,
    p_rr: f64,
    p_prime: f64,
    region: ProbeBox,
    polyconvex: PolyconvexReport,
    convexity: Vec<FamilyConvexity>,
    monotone: Vec<MonotoneReport>,
    concavity: ConcavityReport,
    /// `Phi = -x^2`; must register violations.
    planted_control: ConvexityReport,
    planted_control_detected: bool,
    all_ok: bool,
}

fn oracle_cmd(cfg: &RunConfig) -> Result<Finished> {
    let oracle = cfg.oracle.clone().unwrap_or_default();
    let seed = cfg.seed();
    let s = oracle.s();
    let region = oracle.region.unwrap_or_default();
    let settings = ProbeSettings { samples: oracle.samples, region, seed, ..Default::default() };
    let polyconvex = polyconvex_probe(oracle.samples, &region, seed)?;
    let convexity = oracle
        .families()
        .into_iter()
        .map(|functional| {
            let report = convexity_probe(&functional, s, &settings)?;
            let weighted_applicable = functional.family != Family::Dirichlet;
            let ok = report.violations == 0 && (!weighted_applicable || report.violations_weighted == 0);
            Ok(FamilyConvexity { functional, weighted_applicable, ok, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = [0.5, 1.0, 2.0]
        .iter()
        .map(|&p| monotone_truncation_check(p, oracle.n_max, oracle.samples, &region, seed))
        .collect::<Result<Vec<_>>>()?;
    let p_prime = oracle.p_rr / (oracle.p_rr - 1.0);
    let concavity = concavity_probe(s, p_prime, oracle.samples, seed)?;
    let planted = ProbeSettings { admissible_only: false, ..settings };
    let planted_control = convexity_probe_fn(&|x, _y| -x * x, s, &planted)?;
    let planted_control_detected = planted_control.violations > 0;
    let all_ok = polyconvex.ok()
        && convexity.iter().all(|c| c.ok)
        && monotone.iter().all(|m| m.ok())
        && concavity.violations == 0
        && planted_control_detected;
    let summary = OracleSummary {
        samples: oracle.samples,
        s,
        p_rr: oracle.p_rr,
        p_prime,
        region,
        polyconvex,
        convexity,
        monotone,
        concavity,
        planted_control,
        planted_control_detected,
        all_ok,
    };
    finished(&summary, None)
}
