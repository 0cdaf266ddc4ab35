//! Norms, weak-convergence probes and the Radon-Riesz diagnostic.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::fields::{fmt_f64, wirtinger_derivatives, DerivedField, MappingField};
use crate::functionals::{
    convexity_probe, default_s, integrand_values, monotone_truncation_check, weight_values, Family, FunctionalSpec, ProbeBox, ProbeSettings,
};
use crate::geometry::{Domain, Mesh};
use crate::quadrature::legendre_values;
use crate::sequences::SequenceFacts;
use crate::sum::pairwise_sum;

/// Members `f_j`, their designated limit, and optional weights.
#[derive(Debug, Clone)]
pub struct SequenceHandle {
    pub members: Vec<MappingField>,
    pub limit: MappingField,
    /// Index `j` of each member.
    pub indices: Vec<u32>,
    /// Per-member per-triangle weights `eta_j`.
    pub member_weights: Option<Vec<Arc<Vec<f64>>>>,
    /// Per-triangle weight `eta` of the limit.
    pub limit_weight: Option<Arc<Vec<f64>>>,
    /// Per-member functionals `Phi_j`; the diagnosed spec is the limit `Phi`.
    pub member_specs: Option<Vec<FunctionalSpec>>,
    pub facts: SequenceFacts,
}

impl SequenceHandle {
    pub fn new(members: Vec<MappingField>, limit: MappingField) -> Result<SequenceHandle> {
        if members.is_empty() {
            return config("a sequence needs at least one member");
        }
        let mesh = limit.mesh();
        if members.iter().any(|m| !same_mesh(m.mesh(), mesh)) {
            return config("all sequence members must share the limit's mesh");
        }
        let indices = (1..=members.len() as u32).collect();
        Ok(SequenceHandle {
            members,
            limit,
            indices,
            member_weights: None,
            limit_weight: None,
            member_specs: None,
            facts: SequenceFacts::default(),
        })
    }

    pub fn with_weights(mut self, members: Vec<Arc<Vec<f64>>>, limit: Arc<Vec<f64>>) -> Result<SequenceHandle> {
        let n = self.mesh().triangle_count();
        if members.len() != self.members.len() || members.iter().chain(std::iter::once(&limit)).any(|w| w.len() != n) {
            return config("weights need one field per member and one value per triangle");
        }
        self.member_weights = Some(members);
        self.limit_weight = Some(limit);
        Ok(self)
    }

    pub fn with_member_specs(mut self, specs: Vec<FunctionalSpec>) -> Result<SequenceHandle> {
        if specs.len() != self.members.len() {
            return config("member_specs needs one functional per member");
        }
        self.member_specs = Some(specs);
        Ok(self)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.limit.mesh()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn derived(&self) -> (Vec<DerivedField>, DerivedField) {
        let members = self.members.par_iter().map(wirtinger_derivatives).collect();
        (members, wirtinger_derivatives(&self.limit))
    }

    fn member_spec<'a>(&'a self, spec: &'a FunctionalSpec, k: usize) -> &'a FunctionalSpec {
        self.member_specs.as_ref().map_or(spec, |s| &s[k])
    }
}

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b) || (a.nodes() == b.nodes() && a.triangles() == b.triangles())
}

/// A set of triangles.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subdomain {
    #[default]
    All,
    /// Triangles without a boundary vertex.
    Interior,
    /// Triangles whose centroid is at distance `>= radius` from `center`.
    ExcludeDisk {
        center: Complex64,
        radius: f64,
    },
    Triangles {
        ids: Vec<usize>,
    },
}

impl Subdomain {
    pub fn resolve(&self, mesh: &Mesh) -> Result<Vec<usize>> {
        let ids = match self {
            Subdomain::All => mesh.all_triangles(),
            Subdomain::Interior => mesh.interior_triangles(),
            Subdomain::ExcludeDisk { center, radius } => mesh.triangles_outside(*center, *radius),
            Subdomain::Triangles { ids } => {
                if let Some(bad) = ids.iter().find(|&&t| t >= mesh.triangle_count()) {
                    return config(format!("triangle {bad} is out of range"));
                }
                ids.clone()
            }
        };
        if ids.is_empty() {
            return domain("subdomain contains no triangles");
        }
        Ok(ids)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `sqrt(|f_z|^2 + |f_zbar|^2)` of the difference.
    Df,
    Fz,
    Fzbar,
    J,
    Mu,
}

/// `L^r` distances of one quantity along the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrGap {
    pub quantity: Quantity,
    pub r: f64,
    pub values: Vec<f64>,
    /// Area left out because the Beltrami coefficient is undefined.
    pub excluded_area: Vec<f64>,
    pub warnings: Vec<String>,
}

fn pointwise_gap(quantity: Quantity, a: &DerivedField, b: &DerivedField, t: usize) -> Option<f64> {
    match quantity {
        Quantity::Df => Some(((a.fz[t] - b.fz[t]).norm_sqr() + (a.fzbar[t] - b.fzbar[t]).norm_sqr()).sqrt()),
        Quantity::Fz => Some((a.fz[t] - b.fz[t]).norm()),
        Quantity::Fzbar => Some((a.fzbar[t] - b.fzbar[t]).norm()),
        Quantity::J => Some((a.jacobian[t] - b.jacobian[t]).abs()),
        Quantity::Mu => match (a.beltrami[t], b.beltrami[t]) {
            (Some(x), Some(y)) => Some((x - y).norm()),
            _ => None,
        },
    }
}

fn pointwise_value(quantity: Quantity, a: &DerivedField, t: usize) -> Option<f64> {
    match quantity {
        Quantity::Df => Some((a.fz[t].norm_sqr() + a.fzbar[t].norm_sqr()).sqrt()),
        Quantity::Fz => Some(a.fz[t].norm()),
        Quantity::Fzbar => Some(a.fzbar[t].norm()),
        Quantity::J => Some(a.jacobian[t].abs()),
        Quantity::Mu => a.beltrami[t].map(|m| m.norm()),
    }
}

/// `(sum |d_t|^r |T|)^(1/r)` over `ids` and the area where `d` is undefined.
fn lr_norm(ids: &[usize], areas: &[f64], r: f64, d: impl Fn(usize) -> Option<f64>) -> (f64, f64) {
    let mut terms = Vec::with_capacity(ids.len());
    let mut excluded = Vec::new();
    for &t in ids {
        match d(t) {
            Some(v) => terms.push(if v == 0.0 { 0.0 } else { v.powf(r) * areas[t] }),
            None => excluded.push(areas[t]),
        }
    }
    (pairwise_sum(&terms).powf(1.0 / r), pairwise_sum(&excluded))
}

fn scope_warnings(quantity: Quantity, r: f64, q: Option<f64>) -> Vec<String> {
    let mut w = Vec::new();
    if quantity == Quantity::J && r >= 1.0 {
        w.push(format!("J gap measured at r = {r}; the conclusion covers r < 1 only"));
    }
    if let (Quantity::Df, Some(q)) = (quantity, q) {
        if r >= q {
            w.push(format!("Df gap measured at r = {r}; the conclusion covers r < q = {q} only"));
        }
    }
    w
}

/// Discrete `L^r` distance between each member and the limit over `subdomain`.
pub fn lr_gap(seq: &SequenceHandle, quantity: Quantity, r: f64, subdomain: &Subdomain) -> Result<LrGap> {
    let (members, limit) = seq.derived();
    lr_gap_derived(&members, &limit, quantity, r, subdomain, None)
}

fn lr_gap_derived(
    members: &[DerivedField],
    limit: &DerivedField,
    quantity: Quantity,
    r: f64,
    subdomain: &Subdomain,
    q: Option<f64>,
) -> Result<LrGap> {
    if !(r > 0.0 && r.is_finite()) {
        return config(format!("r must be positive, got {r}"));
    }
    let mesh = limit.mesh();
    let ids = subdomain.resolve(mesh)?;
    let (values, excluded_area) =
        members.par_iter().map(|m| lr_norm(&ids, mesh.areas(), r, |t| pointwise_gap(quantity, m, limit, t))).unzip();
    Ok(LrGap { quantity, r, values, excluded_area, warnings: scope_warnings(quantity, r, q) })
}

/// `L^r` norm of a quantity of one field over a set of triangles.
pub fn lr_norm_of(derived: &DerivedField, quantity: Quantity, r: f64, ids: &[usize]) -> f64 {
    lr_norm(ids, derived.mesh().areas(), r, |t| pointwise_value(quantity, derived, t)).0
}

/// Tensor Legendre polynomials up to `degree` times the domain cutoff, at element centroids.
pub fn probe_dictionary(mesh: &Mesh, degree: usize) -> Vec<Vec<f64>> {
    let domain = mesh.domain();
    let n = mesh.triangle_count();
    let mut px = vec![vec![0.0; n]; degree + 1];
    let mut py = vec![vec![0.0; n]; degree + 1];
    let mut cut = vec![0.0; n];
    let mut buf = vec![0.0; degree + 1];
    for t in 0..n {
        let c = mesh.centroid(t);
        let (x, y) = domain.to_reference_box(c);
        cut[t] = domain.cutoff(c);
        legendre_values(degree, x, &mut buf);
        for k in 0..=degree {
            px[k][t] = buf[k];
        }
        legendre_values(degree, y, &mut buf);
        for k in 0..=degree {
            py[k][t] = buf[k];
        }
    }
    let mut out = Vec::with_capacity((degree + 1) * (degree + 1));
    for m in 0..=degree {
        for k in 0..=degree {
            out.push((0..n).map(|t| px[m][t] * py[k][t] * cut[t]).collect());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakProbeReport {
    pub degree: usize,
    pub dictionary_size: usize,
    /// `max_phi max(|int (f_z,j - f_z) phi|, |int (f_zbar,j - f_zbar) phi|, |int (J_j - J) phi|)`
    pub residuals: Vec<f64>,
}

/// Tests every member against a fixed polynomial dictionary.
pub fn weak_probe(seq: &SequenceHandle, degree: usize) -> WeakProbeReport {
    let (members, limit) = seq.derived();
    weak_probe_derived(&members, &limit, degree)
}

fn weak_probe_derived(members: &[DerivedField], limit: &DerivedField, degree: usize) -> WeakProbeReport {
    let mesh = limit.mesh();
    let dict = probe_dictionary(mesh, degree);
    let areas = mesh.areas();
    let residuals = members
        .iter()
        .map(|m| {
            let dfz: Vec<Complex64> = (0..m.len()).map(|t| (m.fz[t] - limit.fz[t]) * areas[t]).collect();
            let dfzbar: Vec<Complex64> = (0..m.len()).map(|t| (m.fzbar[t] - limit.fzbar[t]) * areas[t]).collect();
            let dj: Vec<f64> = (0..m.len()).map(|t| (m.jacobian[t] - limit.jacobian[t]) * areas[t]).collect();
            dict.par_iter()
                .map(|phi| {
                    let n = phi.len();
                    let re = |v: &[Complex64]| pairwise_sum(&(0..n).map(|t| v[t].re * phi[t]).collect::<Vec<_>>());
                    let im = |v: &[Complex64]| pairwise_sum(&(0..n).map(|t| v[t].im * phi[t]).collect::<Vec<_>>());
                    let a = re(&dfz).hypot(im(&dfz));
                    let b = re(&dfzbar).hypot(im(&dfzbar));
                    let c = pairwise_sum(&(0..n).map(|t| dj[t] * phi[t]).collect::<Vec<_>>()).abs();
                    a.max(b).max(c)
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();
    WeakProbeReport { degree, dictionary_size: dict.len(), residuals }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LscReport {
    pub member_energies: Vec<f64>,
    /// Minimum over the tail half of the sequence.
    pub liminf_energy: f64,
    pub limit_energy: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Area where the limit Jacobian is not positive.
    pub limit_degenerate_area: f64,
}

fn weighted_energy(spec: &FunctionalSpec, derived: &DerivedField, eta: Option<&[f64]>, power: f64) -> f64 {
    let phi = integrand_values(spec, derived);
    let w = weight_values(spec, derived);
    let areas = derived.areas();
    let terms: Vec<f64> = (0..derived.len())
        .map(|t| {
            let v = if power == 1.0 { phi[t] } else { phi[t].powf(power) };
            let e = eta.map_or(1.0, |e| e[t]);
            if v.is_infinite() || w[t].is_infinite() {
                f64::INFINITY
            } else {
                v * w[t] * e * areas[t]
            }
        })
        .collect();
    pairwise_sum(&terms)
}

fn tail_min(values: &[f64]) -> f64 {
    values[values.len() / 2..].iter().copied().fold(f64::INFINITY, f64::min)
}

/// Checks `E(limit) <= liminf E(f_j) + 1e-8 scale` with one fixed functional;
/// per-member functionals of the sequence are ignored.
pub fn lsc_check(spec: &FunctionalSpec, seq: &SequenceHandle) -> LscReport {
    let (members, limit) = seq.derived();
    lsc_check_derived(spec, seq, &members, &limit)
}

fn lsc_check_derived(spec: &FunctionalSpec, seq: &SequenceHandle, members: &[DerivedField], limit: &DerivedField) -> LscReport {
    let member_energies: Vec<f64> = members
        .iter()
        .enumerate()
        .map(|(k, m)| weighted_energy(spec, m, seq.member_weights.as_ref().map(|w| w[k].as_slice()), 1.0))
        .collect();
    let limit_energy = weighted_energy(spec, limit, seq.limit_weight.as_deref().map(|v| v.as_slice()), 1.0);
    let liminf_energy = tail_min(&member_energies);
    let scale = if limit_energy.is_finite() { limit_energy.abs().max(1.0) } else { 1.0 };
    let tolerance = 1e-8 * scale;
    let holds = liminf_energy.is_infinite() || limit_energy <= liminf_energy + tolerance;
    let limit_degenerate_area =
        pairwise_sum(&(0..limit.len()).map(|t| if limit.jacobian[t] > 0.0 { 0.0 } else { limit.areas()[t] }).collect::<Vec<_>>());
    LscReport { member_energies, liminf_energy, limit_energy, scale, tolerance, holds, limit_degenerate_area }
}

/// Exponents for the measured conclusions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RList {
    pub df: Vec<f64>,
    pub j: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Default for RList {
    fn default() -> RList {
        RList { df: vec![1.5], j: vec![0.5], mu: vec![1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseParams {
    pub p_rr: f64,
    /// Exponent for the `Phi y^s` convexity condition; `None` uses `default_s(p_rr)`.
    #[serde(default)]
    pub s: Option<f64>,
    /// Declared Sobolev exponent of the sequence.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub r_list: RList,
    #[serde(default = "default_degree")]
    pub dictionary_degree: usize,
    #[serde(default = "default_hypothesis_tol")]
    pub hypothesis_tol: f64,
    #[serde(default = "default_conclusion_tol")]
    pub conclusion_tol: f64,
    #[serde(default = "default_probe_samples")]
    pub probe_samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Where conclusions are measured; `None` excludes one mesh size around a
    /// known singular point of the sequence and uses the whole mesh otherwise.
    #[serde(default)]
    pub subdomain: Option<Subdomain>,
}

fn default_q() -> f64 {
    2.0
}
fn default_degree() -> usize {
    6
}
fn default_hypothesis_tol() -> f64 {
    1e-3
}
fn default_conclusion_tol() -> f64 {
    1e-2
}
fn default_probe_samples() -> usize {
    20_000
}

impl DiagnoseParams {
    pub fn new(p_rr: f64) -> DiagnoseParams {
        DiagnoseParams {
            p_rr,
            s: None,
            q: default_q(),
            r_list: RList::default(),
            dictionary_degree: default_degree(),
            hypothesis_tol: default_hypothesis_tol(),
            conclusion_tol: default_conclusion_tol(),
            probe_samples: default_probe_samples(),
            seed: 0,
            subdomain: None,
        }
    }

    pub fn s(&self) -> f64 {
        self.s.unwrap_or_else(|| default_s(self.p_rr))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_rr > 1.0 && self.p_rr.is_finite()) {
            return config(format!("p_RR must exceed 1, got {}", self.p_rr));
        }
        let s = self.s();
        if !(s > 0.0 && s < 1.0 - 1.0 / self.p_rr) {
            return config(format!("s = {s} must lie in (0, 1 - 1/p_RR)"));
        }
        if !(self.q >= 1.0) {
            return config(format!("q must be >= 1, got {}", self.q));
        }
        let lists = [&self.r_list.df, &self.r_list.j, &self.r_list.mu];
        if lists.iter().all(|l| l.is_empty()) {
            return config("r_list is empty");
        }
        if lists.iter().any(|l| l.iter().any(|r| !(*r > 0.0 && r.is_finite()))) {
            return config("every r must be positive and finite");
        }
        if !(self.hypothesis_tol > 0.0 && self.conclusion_tol > 0.0) {
            return config("tolerances must be positive");
        }
        if self.probe_samples == 0 {
            return config("probe_samples must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    StrongConvergence,
    EnergyGap,
    WeakProbeFail,
    JacobianDegenerate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub applicable: bool,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyConvergence {
    pub ok: bool,
    /// Exponent applied to the integrand before integration.
    pub power: f64,
    pub member_values: Vec<f64>,
    pub limit_value: f64,
    /// Last member value minus the limit value.
    pub gap: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakProbeCheck {
    pub ok: bool,
    pub tolerance: f64,
    #[serde(flatten)]
    pub probe: WeakProbeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianPositivity {
    pub ok: bool,
    pub degenerate_area_fraction: f64,
    pub min_jacobian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConvergence {
    pub ok: bool,
    pub sup_gaps: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// `Phi_j` non-decreasing in `j`.
    pub monotonicity: ConditionCheck,
    /// `Phi` convex.
    pub convexity: ConditionCheck,
    /// `Phi y^s` convex.
    pub convexity_weighted: ConditionCheck,
    pub energy_convergence: EnergyConvergence,
    pub weak_probe: WeakProbeCheck,
    pub jacobian_positivity: JacobianPositivity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightConvergence>,
}

impl Hypotheses {
    pub fn convexity_ok(&self) -> bool {
        (!self.convexity.applicable || self.convexity.ok) && (!self.convexity_weighted.applicable || self.convexity_weighted.ok)
    }

    pub fn monotonicity_ok(&self) -> bool {
        !self.monotonicity.applicable || self.monotonicity.ok
    }

    pub fn all_ok(&self) -> bool {
        self.convexity_ok()
            && self.monotonicity_ok()
            && self.energy_convergence.ok
            && self.weak_probe.ok
            && self.jacobian_positivity.ok
            && self.weights.as_ref().map_or(true, |w| w.ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    /// `df`, `fz`, `fzbar`, `j`, `mu` or `phi`.
    pub quantity: String,
    pub r: f64,
    pub values: Vec<f64>,
    pub tail: f64,
    pub tolerance: f64,
    pub ok: bool,
    /// Whether the exponent lies in the range the conclusion covers.
    pub in_scope: bool,
    pub excluded_area: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseSummary {
    /// Median of the per-triangle `Df` gap, per member.
    pub df_median: Vec<f64>,
    /// 95th percentile of the per-triangle `Df` gap, per member.
    pub df_p95: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusions {
    pub series: Vec<GapSeries>,
    /// Informational series, not part of the verdict.
    pub extra: Vec<GapSeries>,
    pub pointwise: PointwiseSummary,
    pub subdomain_triangles: usize,
    pub subdomain_area: f64,
}

impl Conclusions {
    pub fn all_ok(&self) -> bool {
        self.series.iter().filter(|s| s.in_scope).all(|s| s.ok)
    }

    pub fn find(&self, quantity: &str, r: f64) -> Option<&GapSeries> {
        self.series.iter().chain(&self.extra).find(|s| s.quantity == quantity && s.r == r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseEcho {
    pub spec: FunctionalSpec,
    pub params: DiagnoseParams,
    pub s: f64,
    pub indices: Vec<u32>,
    pub triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: DiagnoseEcho,
    pub facts: SequenceFacts,
    pub hypotheses: Hypotheses,
    pub conclusions: Conclusions,
    pub warnings: Vec<String>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    /// Gap-vs-j series as CSV: `j, quantity, r, value`.
    pub fn write_series_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["j", "quantity", "r", "value"])?;
        let mut emit = |name: &str, r: f64, values: &[f64]| -> Result<()> {
            for (j, v) in self.config.indices.iter().zip(values) {
                w.write_record([j.to_string(), name.to_string(), fmt_f64(r), fmt_f64(*v)])?;
            }
            Ok(())
        };
        for s in self.conclusions.series.iter().chain(&self.conclusions.extra) {
            emit(&s.quantity, s.r, &s.values)?;
        }
        let e = &self.hypotheses.energy_convergence;
        emit("energy", e.power, &e.member_values)?;
        emit("weak_residual", 0.0, &self.hypotheses.weak_probe.probe.residuals)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_series_csv_file(&self, path: &Path) -> Result<()> {
        self.write_series_csv(std::fs::File::create(path)?)
    }
}

fn percentile(mut v: Vec<f64>, q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let idx = ((v.len() - 1) as f64 * q).round() as usize;
    v[idx]
}

fn non_increasing_trend(values: &[f64]) -> bool {
    let half = values.len() / 2;
    if half == 0 {
        return true;
    }
    let head = values[..half].iter().copied().fold(0.0, f64::max);
    let tail = values[half..].iter().copied().fold(0.0, f64::max);
    tail <= head
}

fn conditions(
    spec: &FunctionalSpec,
    seq: &SequenceHandle,
    s: f64,
    params: &DiagnoseParams,
) -> Result<(ConditionCheck, ConditionCheck, ConditionCheck)> {
    let settings = ProbeSettings { samples: params.probe_samples, seed: params.seed, ..Default::default() };
    let monotonicity = match (&seq.member_specs, spec.family) {
        (None, _) => ConditionCheck { applicable: true, ok: true, detail: "Phi_j = Phi for every j".into() },
        (Some(specs), _) => {
            // Pointwise comparison of consecutive Phi_j on the probe box, then against Phi.
            let ok = specs_monotone(specs, spec, &settings.region, params.probe_samples, params.seed);
            let mut detail = format!("{} consecutive pairs compared on {} samples", specs.len(), params.probe_samples);
            if let Family::TruncExp { p, .. } | Family::ExpP { p } = spec.family {
                let m = monotone_truncation_check(p, 20, params.probe_samples, &settings.region, params.seed)?;
                detail.push_str(&format!("; truncation family violations {}", m.violations));
            }
            ConditionCheck { applicable: true, ok, detail }
        }
    };
    let report = convexity_probe(spec, s, &settings)?;
    let convexity = ConditionCheck {
        applicable: true,
        ok: report.violations == 0,
        detail: format!("{} violations in {} samples, worst {:e}", report.violations, report.samples, report.worst_violation),
    };
    let convexity_weighted = if spec.family == Family::Dirichlet && spec.jac_exp == 0.0 {
        ConditionCheck {
            applicable: false,
            ok: report.violations_weighted == 0,
            detail: "Phi = |Df|^2 is the squared L^2 norm; the uniformly convex norm argument applies instead".into(),
        }
    } else {
        ConditionCheck {
            applicable: true,
            ok: report.violations_weighted == 0,
            detail: format!(
                "{} violations in {} samples, worst {:e}",
                report.violations_weighted, report.samples, report.worst_violation_weighted
            ),
        }
    };
    Ok((monotonicity, convexity, convexity_weighted))
}

fn specs_monotone(specs: &[FunctionalSpec], limit: &FunctionalSpec, region: &ProbeBox, samples: usize, seed: u64) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| {
        let x = rng.gen_range(region.x[0]..=region.x[1]);
        let y = rng.gen_range(region.y[0]..=region.y[1]);
        let mut prev = f64::NEG_INFINITY;
        for s in specs.iter().chain(std::iter::once(limit)) {
            let v = s.phi(x, y);
            if v < prev * (1.0 - 1e-12) {
                return false;
            }
            prev = v;
        }
        true
    })
}

/// Checks the Radon-Riesz hypotheses on `seq` and measures the resulting convergence of derivatives.
pub fn radon_riesz_diagnose(spec: &FunctionalSpec, seq: &SequenceHandle, params: &DiagnoseParams) -> Result<ConvergenceReport> {
    spec.validate()?;
    params.validate()?;
    let s = params.s();
    let mesh = seq.mesh().clone();
    let mut warnings = Vec::new();

    let (monotonicity, convexity, convexity_weighted) = conditions(spec, seq, s, params)?;
    let (members, limit) = seq.derived();
    let all = mesh.all_triangles();

    // weak limit
    let probe = weak_probe_derived(&members, &limit, params.dictionary_degree);
    let weak_scale = lr_norm_of(&limit, Quantity::Df, 1.0, &all).max(1.0);
    let weak_tol = params.hypothesis_tol * weak_scale;
    let last = *probe.residuals.last().expect("non-empty");
    let weak_probe = WeakProbeCheck { ok: last <= weak_tol && non_increasing_trend(&probe.residuals), tolerance: weak_tol, probe };

    // energy convergence; for the Dirichlet integrand the norm itself is compared
    let power = if spec.family == Family::Dirichlet && spec.jac_exp == 0.0 { 1.0 } else { params.p_rr };
    let member_values: Vec<f64> = members
        .iter()
        .enumerate()
        .map(|(k, m)| weighted_energy(seq.member_spec(spec, k), m, seq.member_weights.as_ref().map(|w| w[k].as_slice()), power))
        .collect();
    let limit_value = weighted_energy(spec, &limit, seq.limit_weight.as_deref().map(|v| v.as_slice()), power);
    let gap = member_values.last().copied().unwrap_or(f64::NAN) - limit_value;
    let energy_tol = params.hypothesis_tol * if limit_value.is_finite() { limit_value.abs().max(1.0) } else { 1.0 };
    let energy_convergence = EnergyConvergence {
        ok: limit_value.is_finite() && gap.abs() <= energy_tol,
        power,
        member_values,
        limit_value,
        gap,
        tolerance: energy_tol,
    };

    // limit orientation
    let degenerate: Vec<f64> = (0..limit.len()).map(|t| if limit.jacobian[t] > 0.0 { 0.0 } else { limit.areas()[t] }).collect();
    let degenerate_area_fraction = pairwise_sum(&degenerate) / mesh.total_area();
    let jacobian_positivity =
        JacobianPositivity { ok: degenerate_area_fraction == 0.0, degenerate_area_fraction, min_jacobian: limit.min_jacobian().1 };

    let subdomain = match &params.subdomain {
        Some(s) => s.clone(),
        None => match seq.facts.c1_convergence_away_from {
            Some(center) => Subdomain::ExcludeDisk { center, radius: mesh.mesh_size() },
            None => Subdomain::All,
        },
    };
    let ids = subdomain.resolve(&mesh)?;

    let weights = match (&seq.member_weights, &seq.limit_weight) {
        (Some(ws), Some(w)) => {
            let sup_gaps: Vec<f64> = ws.iter().map(|wj| ids.iter().map(|&t| (wj[t] - w[t]).abs()).fold(0.0, f64::max)).collect();
            let scale = ids.iter().map(|&t| w[t].abs()).fold(0.0, f64::max).max(1.0);
            let tolerance = params.hypothesis_tol * scale;
            let ok = sup_gaps.last().map_or(true, |g| *g <= tolerance) && non_increasing_trend(&sup_gaps);
            Some(WeightConvergence { ok, sup_gaps, tolerance })
        }
        _ => None,
    };

    let hypotheses =
        Hypotheses { monotonicity, convexity, convexity_weighted, energy_convergence, weak_probe, jacobian_positivity, weights };

    // conclusions, always measured
    let series_of = |quantity: Quantity, name: &str, r: f64, in_scope: bool| -> Result<GapSeries> {
        let gap = lr_gap_derived(&members, &limit, quantity, r, &subdomain, Some(params.q))?;
        let scale = lr_norm_of(&limit, quantity, r, &ids).max(1.0);
        let tolerance = params.conclusion_tol * scale;
        let tail = *gap.values.last().expect("non-empty");
        Ok(GapSeries {
            quantity: name.into(),
            r,
            tail,
            tolerance,
            ok: tail <= tolerance,
            in_scope,
            values: gap.values,
            excluded_area: gap.excluded_area,
            warnings: gap.warnings,
        })
    };
    let mut series = Vec::new();
    for &r in &params.r_list.df {
        series.push(series_of(Quantity::Df, "df", r, r < params.q)?);
    }
    for &r in &params.r_list.j {
        series.push(series_of(Quantity::J, "j", r, r < 1.0)?);
    }
    for &r in &params.r_list.mu {
        series.push(series_of(Quantity::Mu, "mu", r, true)?);
    }
    series.push(phi_series(spec, seq, &members, &limit, &ids, params)?);
    for s in &series {
        warnings.extend(s.warnings.iter().cloned());
    }
    let extra = vec![series_of(Quantity::Fz, "fz", 2.0, true)?, series_of(Quantity::Fzbar, "fzbar", 2.0, true)?];
    let pointwise = {
        let per_member: Vec<Vec<f64>> =
            members.par_iter().map(|m| ids.iter().map(|&t| pointwise_gap(Quantity::Df, m, &limit, t).unwrap_or(0.0)).collect()).collect();
        PointwiseSummary {
            df_median: per_member.iter().map(|v| percentile(v.clone(), 0.5)).collect(),
            df_p95: per_member.into_iter().map(|v| percentile(v, 0.95)).collect(),
        }
    };
    let subdomain_area = pairwise_sum(&ids.iter().map(|&t| mesh.areas()[t]).collect::<Vec<_>>());
    let conclusions = Conclusions { series, extra, pointwise, subdomain_triangles: ids.len(), subdomain_area };

    let verdict = if !hypotheses.weak_probe.ok {
        Verdict::WeakProbeFail
    } else if !hypotheses.energy_convergence.ok {
        Verdict::EnergyGap
    } else if !hypotheses.jacobian_positivity.ok {
        Verdict::JacobianDegenerate
    } else if !hypotheses.all_ok() {
        Verdict::Inconclusive
    } else if conclusions.all_ok() {
        Verdict::StrongConvergence
    } else {
        Verdict::Inconclusive
    };

    Ok(ConvergenceReport {
        config: DiagnoseEcho {
            spec: spec.clone(),
            params: params.clone(),
            s,
            indices: seq.indices.clone(),
            triangles: mesh.triangle_count(),
        },
        facts: seq.facts.clone(),
        hypotheses,
        conclusions,
        warnings,
        verdict,
    })
}

fn phi_series(
    spec: &FunctionalSpec,
    seq: &SequenceHandle,
    members: &[DerivedField],
    limit: &DerivedField,
    ids: &[usize],
    params: &DiagnoseParams,
) -> Result<GapSeries> {
    let r = params.p_rr;
    let areas = limit.areas();
    let phi_limit = integrand_values(spec, limit);
    let values: Vec<f64> = members
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let phi = integrand_values(seq.member_spec(spec, k), m);
            lr_norm(ids, areas, r, |t| Some((phi[t] - phi_limit[t]).abs())).0
        })
        .collect();
    let scale = lr_norm(ids, areas, r, |t| Some(phi_limit[t].abs())).0;
    let tolerance = params.conclusion_tol * if scale.is_finite() { scale.max(1.0) } else { 1.0 };
    let tail = *values.last().expect("non-empty");
    Ok(GapSeries {
        quantity: "phi".into(),
        r,
        tail,
        tolerance,
        ok: tail <= tolerance,
        in_scope: true,
        excluded_area: vec![0.0; values.len()],
        values,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSet {
    pub triangles: Vec<usize>,
    pub complement_area: f64,
}

/// Triangles with `eps < J < 1/eps` and `Phi < 1/eps`.
pub fn good_set(derived_limit: &DerivedField, phi_limit: &[f64], eps: f64) -> Result<GoodSet> {
    if !(eps > 0.0 && eps < 1.0) {
        return config(format!("eps must lie in (0, 1), got {eps}"));
    }
    if phi_limit.len() != derived_limit.len() {
        return config("one integrand value per triangle is required");
    }
    let areas = derived_limit.areas();
    let mut triangles = Vec::new();
    let mut outside = Vec::new();
    for t in 0..derived_limit.len() {
        let j = derived_limit.jacobian[t];
        if j > eps && j < 1.0 / eps && phi_limit[t] < 1.0 / eps {
            triangles.push(t);
        } else {
            outside.push(areas[t]);
        }
    }
    Ok(GoodSet { triangles, complement_area: pairwise_sum(&outside) })
}

/// `(sum_T sum_{v in T} |f(v)|^q |T|/3, sum_T (|f_z| + |f_zbar|)^q |T|)` over `ids`.
pub fn sobolev_parts(mapping: &MappingField, q: f64, ids: &[usize]) -> (f64, f64) {
    let derived = wirtinger_derivatives(mapping);
    let mesh = mapping.mesh();
    let values = mapping.values();
    let areas = mesh.areas();
    let f_terms: Vec<f64> =
        ids.iter().map(|&t| mesh.triangles()[t].iter().map(|&v| values[v].norm().powf(q)).sum::<f64>() * areas[t] / 3.0).collect();
    let d_terms: Vec<f64> = ids.iter().map(|&t| (derived.fz[t].norm() + derived.fzbar[t].norm()).powf(q) * areas[t]).collect();
    (pairwise_sum(&f_terms), pairwise_sum(&d_terms))
}

/// Discrete `W^{1,q}` norm over `subdomain`.
pub fn sobolev_norm(mapping: &MappingField, q: f64, subdomain: &Subdomain) -> Result<f64> {
    if !(q >= 1.0) {
        return config(format!("q must be >= 1, got {q}"));
    }
    let ids = subdomain.resolve(mapping.mesh())?;
    let (f, d) = sobolev_parts(mapping, q, &ids);
    Ok((f + d).powf(1.0 / q))
}

/// `P(t) = t^2 / log(e + t)`.
pub fn orlicz_p(t: f64) -> f64 {
    t * t / (std::f64::consts::E + t).ln()
}

/// Luxemburg norm of `|Df| = |f_z| + |f_zbar|` for `P(t) = t^2 / log(e + t)`.
pub fn orlicz_norm(mapping: &MappingField, subdomain: &Subdomain) -> Result<f64> {
    let ids = subdomain.resolve(mapping.mesh())?;
    let derived = wirtinger_derivatives(mapping);
    let areas = mapping.mesh().areas();
    let df: Vec<(f64, f64)> = ids.iter().map(|&t| (derived.fz[t].norm() + derived.fzbar[t].norm(), areas[t])).collect();
    Ok(luxemburg(&df))
}

/// Solves `sum P(d / lambda) a = 1` for `(d, a)` pairs by bisection.
pub fn luxemburg(values: &[(f64, f64)]) -> f64 {
    let modular = |lambda: f64| pairwise_sum(&values.iter().map(|&(d, a)| orlicz_p(d / lambda) * a).collect::<Vec<_>>());
    let max = values.iter().map(|v| v.0).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let mut hi = max;
    while modular(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while modular(lo) <= 1.0 {
        lo /= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaIdentity {
    pub integral: f64,
    pub target: f64,
}

/// `int J` against the area of the domain (`pi` on the disk).
pub fn jacobian_area_identity(derived: &DerivedField) -> AreaIdentity {
    let areas = derived.areas();
    let integral = pairwise_sum(&(0..derived.len()).map(|t| derived.jacobian[t] * areas[t]).collect::<Vec<_>>());
    let target = match derived.mesh().domain() {
        Domain::Disk => std::f64::consts::PI,
        d => d.area(),
    };
    AreaIdentity { integral, target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample_analytic;
    use crate::sequences::{generate, AnalyticMap, RecipeKind, SequenceRecipe};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant_seq() -> SequenceHandle {
        let mesh = Arc::new(Mesh::disk(3).unwrap());
        let r = SequenceRecipe::new(RecipeKind::Constant { map: AnalyticMap::affine(c(1.0, 0.0), c(0.2, 0.1)) }, 4);
        generate(&r, mesh).unwrap()
    }

    #[test]
    fn constant_sequence_has_zero_gaps() {
        let seq = constant_seq();
        for q in [Quantity::Df, Quantity::Fz, Quantity::Fzbar, Quantity::J, Quantity::Mu] {
            for r in [0.5, 1.0, 2.0] {
                assert!(lr_gap(&seq, q, r, &Subdomain::All).unwrap().values.iter().all(|v| *v == 0.0));
            }
        }
        assert!(weak_probe(&seq, 4).residuals.iter().all(|v| *v == 0.0));
        let lsc = lsc_check(&FunctionalSpec::exp_p(1.0), &seq);
        assert!(lsc.holds && lsc.liminf_energy == lsc.limit_energy);
    }

    #[test]
    fn constant_sequence_is_strongly_convergent() {
        let seq = constant_seq();
        let report = radon_riesz_diagnose(&FunctionalSpec::lp_mean(2.0), &seq, &DiagnoseParams::new(2.0)).unwrap();
        assert_eq!(report.verdict, Verdict::StrongConvergence);
        assert!(report.conclusions.series.iter().all(|s| s.tail == 0.0));
    }

    #[test]
    fn scaled_identity_probe_decays_like_one_over_j() {
        let mesh = Arc::new(Mesh::disk(3).unwrap());
        let members: Vec<MappingField> =
            (1..=8).map(|j| MappingField::identity(mesh.clone()).scaled(c(1.0 + 1.0 / j as f64, 0.0))).collect();
        let seq = SequenceHandle::new(members, MappingField::identity(mesh)).unwrap();
        let res = weak_probe(&seq, 6).residuals;
        for (j, w) in res.windows(2).enumerate() {
            assert!(w[1] < w[0]);
            let ratio = res[0] / res[j + 1];
            assert!(ratio > 0.5 * (j + 2) as f64);
        }
    }

    #[test]
    fn empty_subdomain_is_an_error() {
        let seq = constant_seq();
        assert!(lr_gap(&seq, Quantity::J, 0.5, &Subdomain::Triangles { ids: vec![] }).is_err());
        assert!(lr_gap(&seq, Quantity::J, 0.5, &Subdomain::ExcludeDisk { center: c(0.0, 0.0), radius: 5.0 }).is_err());
    }

    #[test]
    fn dictionary_size_and_boundary_decay() {
        let mesh = Mesh::unit_square(8, 8).unwrap();
        let dict = probe_dictionary(&mesh, 6);
        assert_eq!(dict.len(), 49);
        assert!((dict[0].iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 0.1);
    }

    #[test]
    fn good_set_thresholds() {
        let mesh = Arc::new(Mesh::disk(2).unwrap());
        let d = wirtinger_derivatives(&MappingField::identity(mesh.clone()));
        let phi = integrand_values(&FunctionalSpec::lp_mean(2.0), &d);
        assert_eq!(good_set(&d, &phi, 0.1).unwrap().triangles.len(), d.len());
        let g = good_set(&d, &phi, 0.6).unwrap();
        assert!(g.triangles.is_empty() && (g.complement_area - mesh.total_area()).abs() < 1e-14);
        assert!(good_set(&d, &phi, 1.0).is_err());
    }

    #[test]
    fn good_set_complement_of_radial_stretch() {
        let mesh = Arc::new(Mesh::disk(5).unwrap());
        let d = wirtinger_derivatives(&sample_analytic(mesh, &AnalyticMap::RadialStretch { alpha: 2.0 }).unwrap());
        let phi = integrand_values(&FunctionalSpec::lp_mean(1.0), &d);
        let g = good_set(&d, &phi, 0.01).unwrap();
        let expect = std::f64::consts::PI * 0.005;
        assert!((g.complement_area - expect).abs() < 0.5 * expect, "{} vs {expect}", g.complement_area);
    }

    #[test]
    fn sobolev_norm_examples() {
        let mesh = Arc::new(Mesh::unit_square(4, 4).unwrap());
        let zero = MappingField::from_fn(mesh.clone(), |_| c(0.0, 0.0)).unwrap();
        assert_eq!(sobolev_norm(&zero, 2.0, &Subdomain::All).unwrap(), 0.0);
        let id = MappingField::identity(mesh.clone());
        assert!((sobolev_parts(&id, 2.0, &mesh.all_triangles()).1 - 1.0).abs() < 1e-12);
        let aff = MappingField::from_fn(mesh.clone(), |z| z + z.conj() / 3.0).unwrap();
        assert!((sobolev_parts(&aff, 2.0, &mesh.all_triangles()).1.sqrt() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn orlicz_norm_examples() {
        let mesh = Arc::new(Mesh::unit_square(4, 4).unwrap());
        let zero = MappingField::from_fn(mesh.clone(), |_| c(0.0, 0.0)).unwrap();
        assert_eq!(orlicz_norm(&zero, &Subdomain::All).unwrap(), 0.0);
        let id = MappingField::identity(mesh.clone());
        let lambda = orlicz_norm(&id, &Subdomain::All).unwrap();
        // independent oracle: t with t^2 = log(e + t) by fixed-point iteration
        let mut t: f64 = 1.0;
        for _ in 0..200 {
            t = (std::f64::consts::E + t).ln().sqrt();
        }
        assert!((lambda - 1.0 / t).abs() < 1e-9, "{lambda} vs {}", 1.0 / t);
        assert!((lambda - 0.860).abs() < 2e-3);
        let scaled = orlicz_norm(&id.scaled(c(0.0, -3.5)), &Subdomain::All).unwrap();
        assert!((scaled - 3.5 * lambda).abs() < 1e-8 * scaled);
    }

    #[test]
    fn area_identity_examples() {
        let mesh = Arc::new(Mesh::disk(5).unwrap());
        let id = jacobian_area_identity(&wirtinger_derivatives(&MappingField::identity(mesh.clone())));
        assert!((id.integral / id.target - 1.0).abs() < 1e-3);
        let half = jacobian_area_identity(&wirtinger_derivatives(&MappingField::identity(mesh.clone()).scaled(c(0.5, 0.0))));
        assert!((half.integral - mesh.total_area() / 4.0).abs() < 1e-12);
        let st = sample_analytic(mesh, &AnalyticMap::RadialStretch { alpha: 2.0 }).unwrap();
        let a = jacobian_area_identity(&wirtinger_derivatives(&st));
        assert!((a.integral / a.target - 1.0).abs() < 1e-2);
    }

    #[test]
    fn params_validation() {
        assert!(DiagnoseParams::new(1.0).validate().is_err());
        let mut p = DiagnoseParams::new(2.0);
        p.s = Some(0.6);
        assert!(p.validate().is_err());
        let mut p = DiagnoseParams::new(2.0);
        p.r_list = RList { df: vec![], j: vec![], mu: vec![] };
        assert!(p.validate().is_err());
        let mut p = DiagnoseParams::new(2.0);
        p.r_list.j = vec![-1.0];
        assert!(p.validate().is_err());
    }

    #[test]
    fn out_of_scope_exponents_warn() {
        let seq = constant_seq();
        let mut p = DiagnoseParams::new(2.0);
        p.r_list.j = vec![0.5, 1.5];
        let report = radon_riesz_diagnose(&FunctionalSpec::lp_mean(2.0), &seq, &p).unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("r < 1")));
        let s = report.conclusions.find("j", 1.5).unwrap();
        assert!(!s.in_scope);
    }

    #[test]
    fn weights_enter_energy_and_hypotheses() {
        let seq = constant_seq();
        let n = seq.mesh().triangle_count();
        let ws: Vec<Arc<Vec<f64>>> = (1..=4).map(|j| Arc::new(vec![1.0 + 1.0 / j as f64; n])).collect();
        let seq = seq.with_weights(ws, Arc::new(vec![1.0; n])).unwrap();
        let report = radon_riesz_diagnose(&FunctionalSpec::lp_mean(2.0), &seq, &DiagnoseParams::new(2.0)).unwrap();
        assert!(!report.hypotheses.weights.as_ref().unwrap().ok);
        assert_eq!(report.verdict, Verdict::EnergyGap);
    }

    #[test]
    fn report_serialises_and_exports_csv() {
        let seq = constant_seq();
        let report = radon_riesz_diagnose(&FunctionalSpec::exp_p(1.0), &seq, &DiagnoseParams::new(2.0)).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: ConvergenceReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.verdict, report.verdict);
        let mut buf = Vec::new();
        report.write_series_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("j,quantity,r,value"));
    }
}
