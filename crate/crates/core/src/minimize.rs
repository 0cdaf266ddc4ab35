//! Orientation-preserving descent for discrete distortion energies.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::fields::{wirtinger_derivatives, DerivedField, MappingField, WirtingerStencil, PAR_THRESHOLD};
use crate::functionals::{energy, Family, FunctionalSpec, NormChoice, Weight};
use crate::geometry::{Domain, Mesh};
use crate::linalg::{harmonic_extension, InteriorSystem};
use crate::sum::pairwise_sum;

const MIN_STEP: f64 = 1e-14;
const DIFFEO_GRID: usize = 4096;

/// Dirichlet data on the boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    Identity,
    /// `theta -> theta + sum_n a_n sin(n theta) + b_n cos(n theta)`, `n = 1, 2, ...`
    CircleDiffeo {
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
    },
    /// One value per entry of `Mesh::boundary_nodes`, in that order.
    Explicit {
        values: Vec<Complex64>,
    },
}

impl BoundaryData {
    pub fn circle_diffeo(a: Vec<f64>, b: Vec<f64>) -> BoundaryData {
        BoundaryData::CircleDiffeo { a, b }
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        match self {
            BoundaryData::Identity => Ok(()),
            BoundaryData::CircleDiffeo { a, b } => {
                if mesh.domain() != Domain::Disk {
                    return config("circle_diffeo boundary data needs a disk mesh");
                }
                if a.iter().chain(b).any(|c| !c.is_finite()) {
                    return config("circle_diffeo coefficients must be finite");
                }
                let worst = (0..DIFFEO_GRID)
                    .map(|k| circle_derivative(a, b, 2.0 * PI * k as f64 / DIFFEO_GRID as f64))
                    .fold(f64::INFINITY, f64::min);
                if worst <= 0.0 {
                    return config(format!("circle_diffeo is not a homeomorphism: min derivative {worst}"));
                }
                Ok(())
            }
            BoundaryData::Explicit { values } => {
                if values.len() != mesh.boundary_nodes().len() {
                    return config(format!("explicit boundary data needs {} values, got {}", mesh.boundary_nodes().len(), values.len()));
                }
                if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return config("explicit boundary values must be finite");
                }
                Ok(())
            }
        }
    }

    /// Value prescribed at boundary node `z` (the `k`-th boundary node).
    fn value(&self, k: usize, z: Complex64) -> Complex64 {
        match self {
            BoundaryData::Identity => z,
            BoundaryData::CircleDiffeo { a, b } => {
                let theta = z.arg();
                let mut phase = theta;
                for (n, c) in a.iter().enumerate() {
                    phase += c * ((n + 1) as f64 * theta).sin();
                }
                for (n, c) in b.iter().enumerate() {
                    phase += c * ((n + 1) as f64 * theta).cos();
                }
                Complex64::from_polar(1.0, phase)
            }
            BoundaryData::Explicit { values } => values[k],
        }
    }
}

fn circle_derivative(a: &[f64], b: &[f64], theta: f64) -> f64 {
    let mut d = 1.0;
    for (n, c) in a.iter().enumerate() {
        let n = (n + 1) as f64;
        d += n * c * (n * theta).cos();
    }
    for (n, c) in b.iter().enumerate() {
        let n = (n + 1) as f64;
        d -= n * c * (n * theta).sin();
    }
    d
}

/// Harmonic extension of `boundary` into the interior of `mesh`.
pub fn initial_map(mesh: Arc<Mesh>, boundary: &BoundaryData) -> Result<MappingField> {
    boundary.validate(&mesh)?;
    let mut values = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
    for (k, &v) in mesh.boundary_nodes().iter().enumerate() {
        values[v] = boundary.value(k, mesh.nodes()[v]);
    }
    harmonic_extension(&mesh, &mut values)?;
    MappingField::new(mesh, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Descent along `-K^{-1} g` with the P1 stiffness matrix `K` (Sobolev gradient).
    #[default]
    Laplacian,
    /// Descent along `-g / lumped area`.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub initial_step: f64,
    pub backtracking_factor: f64,
    /// Smallest admissible per-triangle Jacobian; `None` means `1e-8 * median J` of the start.
    #[serde(default)]
    pub jacobian_floor: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub preconditioner: Preconditioner,
    /// Random interior displacement of the start, in units of the mesh size.
    #[serde(default)]
    pub initial_perturbation: f64,
}

impl Default for MinimizeConfig {
    fn default() -> MinimizeConfig {
        MinimizeConfig {
            max_iterations: 500,
            gradient_tolerance: 1e-7,
            initial_step: 1.0,
            backtracking_factor: 0.5,
            jacobian_floor: None,
            seed: 0,
            preconditioner: Preconditioner::Laplacian,
            initial_perturbation: 0.0,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return config("max_iterations must be positive");
        }
        if !(self.gradient_tolerance > 0.0) || !(self.initial_step > 0.0) {
            return config("gradient_tolerance and initial_step must be positive");
        }
        if !(self.backtracking_factor > 0.0 && self.backtracking_factor < 1.0) {
            return config(format!("backtracking_factor must lie in (0, 1), got {}", self.backtracking_factor));
        }
        if let Some(floor) = self.jacobian_floor {
            if !(floor > 0.0) {
                return config(format!("jacobian_floor must be positive, got {floor}"));
            }
        }
        if !(self.initial_perturbation >= 0.0 && self.initial_perturbation.is_finite()) {
            return config("initial_perturbation must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub min_j: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizeStatus {
    Converged,
    MaxIterations,
    /// Backtracking fell below the minimum step.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub field: MappingField,
    pub energy: f64,
    pub trace: Vec<TraceRow>,
    pub status: MinimizeStatus,
    pub jacobian_floor: f64,
}

impl MinimizeResult {
    pub fn write_trace_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        use crate::fields::fmt_f64;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "energy", "grad_norm", "min_J", "step"])?;
        for r in &self.trace {
            w.write_record([r.iteration.to_string(), fmt_f64(r.energy), fmt_f64(r.grad_norm), fmt_f64(r.min_j), fmt_f64(r.step)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Gradient of the discrete energy with respect to nodal values, as
/// `dE/d(Re u_k) + i dE/d(Im u_k)`; zero at boundary nodes.
pub fn energy_gradient(spec: &FunctionalSpec, mapping: &MappingField, jacobian_floor: f64) -> Result<Vec<Complex64>> {
    let derived = wirtinger_derivatives(mapping);
    gradient_from_derived(spec, mapping, &derived, jacobian_floor)
}

fn gradient_from_derived(spec: &FunctionalSpec, mapping: &MappingField, derived: &DerivedField, floor: f64) -> Result<Vec<Complex64>> {
    let needs_positive = !matches!(spec.family, Family::Dirichlet) || spec.jac_exp != 0.0 || spec.weight == Weight::HyperbolicImage;
    let (worst, jmin) = derived.min_jacobian();
    if needs_positive && !(jmin > floor) {
        return domain(format!("jacobian {jmin:e} at triangle {worst} is not above the floor {floor:e}"));
    }
    let mesh = mapping.mesh();
    let areas = mesh.areas();
    let element = |t: usize| -> [Complex64; 3] {
        let st = WirtingerStencil::new(mesh, t);
        let (a, b) = (derived.fz[t], derived.fzbar[t]);
        let (an, bn) = (a.norm(), b.norm());
        let x = spec.norm.eval(a, b);
        let y = derived.jacobian[t];
        let (g, gx, gy) = spec.phi_with_partials(x, y);
        let centroid = mesh.centroid(t);
        let weight = spec.weight_at(t, centroid, derived.image_centroids[t]);
        let scale = weight * areas[t];
        // (ca, cb): gradient is 2 Re-linear form ca * a conj(alpha_k) + cb * b conj(beta_k)
        let (da, db) = match spec.norm {
            NormChoice::Hs => {
                let gx_over_x = if x > 0.0 { gx / x } else { 0.0 };
                (2.0 * (gx_over_x + gy) * a, 2.0 * (gx_over_x - gy) * b)
            }
            NormChoice::Op => {
                let ua = if an > 0.0 { a / an } else { Complex64::new(0.0, 0.0) };
                let ub = if bn > 0.0 { b / bn } else { Complex64::new(0.0, 0.0) };
                (gx * ua + 2.0 * gy * a, gx * ub - 2.0 * gy * b)
            }
        };
        let image_term = if spec.weight == Weight::HyperbolicImage {
            let c = derived.image_centroids[t];
            let r = 1.0 - c.norm_sqr();
            g * areas[t] * 4.0 * c / (r * r * r) / 3.0
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for k in 0..3 {
            out[k] = scale * (da * st.dz[k].conj() + db * st.dzbar[k].conj()) + image_term;
        }
        out
    };
    let n = derived.len();
    let contributions: Vec<[Complex64; 3]> =
        if n >= PAR_THRESHOLD { (0..n).into_par_iter().map(element).collect() } else { (0..n).map(element).collect() };
    let mut grad = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
    for (tri, c) in mesh.triangles().iter().zip(&contributions) {
        for k in 0..3 {
            grad[tri[k]] += c[k];
        }
    }
    for &v in mesh.boundary_nodes() {
        grad[v] = Complex64::new(0.0, 0.0);
    }
    Ok(grad)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn perturb(field: &MappingField, amplitude: f64, seed: u64) -> Result<MappingField> {
    if amplitude == 0.0 {
        return Ok(field.clone());
    }
    let mesh = field.mesh();
    let h = mesh.mesh_size() * amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(v, &z)| {
            let d = Complex64::new(rng.gen_range(-h..=h), rng.gen_range(-h..=h));
            if mesh.is_boundary(v) {
                z
            } else {
                z + d
            }
        })
        .collect();
    field.with_values(values)
}

/// Minimise starting from the harmonic extension of `boundary`.
pub fn minimize_energy(spec: &FunctionalSpec, mesh: Arc<Mesh>, boundary: &BoundaryData, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    let start = initial_map(mesh, boundary)?;
    let start = perturb(&start, cfg.initial_perturbation, cfg.seed)?;
    minimize_from(spec, start, cfg)
}

/// Minimise keeping the boundary values of `start` fixed.
pub fn minimize_from(spec: &FunctionalSpec, start: MappingField, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    spec.validate()?;
    cfg.validate()?;
    let mesh = start.mesh().clone();
    let derived = wirtinger_derivatives(&start);
    let (worst, jmin) = derived.min_jacobian();
    if !(jmin > 0.0) {
        return Err(Error::Domain(format!("initial map is not orientation preserving: J = {jmin:e} on triangle {worst}")));
    }
    let floor = cfg.jacobian_floor.unwrap_or_else(|| 1e-8 * median(derived.jacobian.clone()));
    if jmin < floor {
        return domain(format!("initial map violates the jacobian floor {floor:e} on triangle {worst}"));
    }
    let system = match cfg.preconditioner {
        Preconditioner::Laplacian => Some(InteriorSystem::new(&mesh)),
        Preconditioner::None => None,
    };
    let lumped = mesh.lumped_node_areas();
    let interior: Vec<usize> = (0..mesh.node_count()).filter(|&v| !mesh.is_boundary(v)).collect();

    let mut field = start;
    let mut derived = derived;
    let mut current = energy(spec, &derived);
    if !current.is_finite() {
        return domain("initial energy is not finite");
    }
    let mut step = cfg.initial_step;
    let mut trace = Vec::new();
    let mut status = MinimizeStatus::MaxIterations;
    for iteration in 0..=cfg.max_iterations {
        let grad = gradient_from_derived(spec, &field, &derived, floor)?;
        let direction: Vec<Complex64> = match &system {
            Some(sys) => {
                let rhs: Vec<Complex64> = sys.interior.iter().map(|&v| grad[v]).collect();
                let d = sys.solve_complex(&rhs)?;
                let mut full = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
                for (k, &v) in sys.interior.iter().enumerate() {
                    full[v] = -d[k];
                }
                full
            }
            None => grad.iter().zip(&lumped).map(|(g, a)| -g / a).collect(),
        };
        // dual norm of the gradient in the preconditioner metric
        let slope: Vec<f64> = interior.iter().map(|&v| -(grad[v].conj() * direction[v]).re).collect();
        let grad_norm = pairwise_sum(&slope).max(0.0).sqrt();
        trace.push(TraceRow {
            iteration,
            energy: current,
            grad_norm,
            min_j: derived.min_jacobian().1,
            step: if iteration == 0 { 0.0 } else { step },
        });
        if grad_norm <= cfg.gradient_tolerance {
            status = MinimizeStatus::Converged;
            break;
        }
        if iteration == cfg.max_iterations {
            break;
        }
        let mut accepted = None;
        while step >= MIN_STEP {
            let values: Vec<Complex64> = field.values().iter().zip(&direction).map(|(u, d)| u + step * d).collect();
            let trial = field.with_values(values)?;
            let trial_derived = wirtinger_derivatives(&trial);
            let trial_min = trial_derived.min_jacobian().1;
            if trial_min >= floor {
                let e = energy(spec, &trial_derived);
                if e < current {
                    accepted = Some((trial, trial_derived, e));
                    break;
                }
            }
            step *= cfg.backtracking_factor;
        }
        match accepted {
            Some((trial, trial_derived, e)) => {
                field = trial;
                derived = trial_derived;
                current = e;
                step /= cfg.backtracking_factor;
            }
            None => {
                status = MinimizeStatus::Stalled;
                break;
            }
        }
    }
    Ok(MinimizeResult { field, energy: current, trace, status, jacobian_floor: floor })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub n: u32,
    pub result: MinimizeResult,
}

/// Minimise the truncated exponential functionals for each `N`, warm-starting
/// every run from the previous minimiser. `template` supplies the norm, the
/// Jacobian exponent and the weight; its family is replaced.
pub fn truncation_sweep(
    p: f64,
    n_list: &[u32],
    template: &FunctionalSpec,
    mesh: Arc<Mesh>,
    boundary: &BoundaryData,
    cfg: &MinimizeConfig,
) -> Result<Vec<SweepEntry>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return config("N list must be non-empty and strictly increasing");
    }
    cfg.validate()?;
    let mut start = perturb(&initial_map(mesh, boundary)?, cfg.initial_perturbation, cfg.seed)?;
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut spec = template.clone();
        spec.family = Family::TruncExp { p, n };
        let result = minimize_from(&spec, start, cfg)?;
        start = result.field.clone();
        out.push(SweepEntry { n, result });
    }
    Ok(out)
}
