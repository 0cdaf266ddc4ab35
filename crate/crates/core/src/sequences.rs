//! Closed-form maps and mapping sequences with known convergence behaviour.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::convergence::SequenceHandle;
use crate::error::{config, Result};
use crate::fields::{sample_analytic, MappingField};
use crate::geometry::{Domain, Mesh};
use crate::quadrature::gauss_legendre;

/// Closed-form maps that can be sampled on a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum AnalyticMap {
    /// `a z + b conj(z) + c`
    Affine {
        a: Complex64,
        b: Complex64,
        #[serde(default)]
        c: Complex64,
    },
    /// `z |z|^(alpha - 1)`
    RadialStretch { alpha: f64 },
    /// `z + sin(2 pi j Re z) / (2 pi j)`
    Oscillation { j: u32 },
    /// Convolution of `target` with a polynomial bump of support radius `radius`.
    Mollified { target: Box<AnalyticMap>, radius: f64 },
}

/// Bump exponent: `rho(u) = (k+1)/pi (1 - |u|^2)^k` on the unit disk.
const BUMP_POWER: i32 = 3;
const MOLLIFIER_POINTS: usize = 16;

struct MollifierRule {
    offsets: Vec<Complex64>,
    weights: Vec<f64>,
}

/// 16 Gauss-Legendre radii times 16 equispaced angles, weights summing to 1.
fn mollifier_rule() -> &'static MollifierRule {
    static RULE: OnceLock<MollifierRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(MOLLIFIER_POINTS);
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * (xi + 1.0);
            let radial = 0.5 * wi * (1.0 - r * r).powi(BUMP_POWER) * r;
            for k in 0..MOLLIFIER_POINTS {
                let phi = 2.0 * PI * (k as f64 + 0.5) / MOLLIFIER_POINTS as f64;
                offsets.push(Complex64::from_polar(r, phi));
                weights.push(radial);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        MollifierRule { offsets, weights }
    })
}

impl AnalyticMap {
    pub fn affine(a: Complex64, b: Complex64) -> AnalyticMap {
        AnalyticMap::Affine { a, b, c: Complex64::new(0.0, 0.0) }
    }

    pub fn identity() -> AnalyticMap {
        AnalyticMap::affine(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticMap::Affine { .. } => Ok(()),
            AnalyticMap::RadialStretch { alpha } if *alpha > 0.0 && alpha.is_finite() => Ok(()),
            AnalyticMap::RadialStretch { alpha } => config(format!("radial stretch needs alpha > 0, got {alpha}")),
            AnalyticMap::Oscillation { j } if *j >= 1 => Ok(()),
            AnalyticMap::Oscillation { .. } => config("oscillation index must be >= 1"),
            AnalyticMap::Mollified { target, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return config(format!("mollification radius must be positive, got {radius}"));
                }
                target.validate()
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticMap::Affine { a, b, c } => a * z + b * z.conj() + c,
            AnalyticMap::RadialStretch { alpha } => {
                let r = z.norm();
                if r == 0.0 {
                    z
                } else {
                    z * r.powf(alpha - 1.0)
                }
            }
            AnalyticMap::Oscillation { j } => {
                let w = 2.0 * PI * *j as f64;
                z + (w * z.re).sin() / w
            }
            AnalyticMap::Mollified { target, radius } => {
                let rule = mollifier_rule();
                let mut acc = Complex64::new(0.0, 0.0);
                for (u, w) in rule.offsets.iter().zip(&rule.weights) {
                    acc += *w * target.eval(z - *radius * u);
                }
                acc
            }
        }
    }

    fn domain_ok(&self, domain: Domain) -> bool {
        match self {
            AnalyticMap::Oscillation { .. } => matches!(domain, Domain::Rect { .. }),
            AnalyticMap::RadialStretch { .. } => domain == Domain::Disk,
            AnalyticMap::Mollified { target, .. } => target.domain_ok(domain),
            AnalyticMap::Affine { .. } => true,
        }
    }
}

/// Closed forms for `f(z) = z |z|^(alpha - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialStretchFacts {
    pub alpha: f64,
    /// `|f_z| = fz_coefficient |z|^(alpha-1)`
    pub fz_coefficient: f64,
    /// `|f_zbar| = fzbar_coefficient |z|^(alpha-1)`
    pub fzbar_coefficient: f64,
    /// `J = jacobian_coefficient |z|^(2 alpha - 2)`
    pub jacobian_coefficient: f64,
    pub hs_distortion: f64,
    pub beltrami_modulus: f64,
}

pub fn radial_stretch_facts(alpha: f64) -> Result<RadialStretchFacts> {
    if !(alpha > 0.0) {
        return config(format!("radial stretch needs alpha > 0, got {alpha}"));
    }
    Ok(RadialStretchFacts {
        alpha,
        fz_coefficient: (alpha + 1.0) / 2.0,
        fzbar_coefficient: (alpha - 1.0).abs() / 2.0,
        jacobian_coefficient: alpha,
        hs_distortion: (alpha * alpha + 1.0) / alpha,
        beltrami_modulus: (alpha - 1.0).abs() / (alpha + 1.0),
    })
}

impl RadialStretchFacts {
    /// `(f_z, f_zbar)` at `z != 0`.
    pub fn wirtinger(&self, z: Complex64) -> (Complex64, Complex64) {
        let r = z.norm();
        let scale = r.powf(self.alpha - 1.0);
        let phase = (z / r) * (z / r);
        (Complex64::new(self.fz_coefficient * scale, 0.0), (self.alpha - 1.0) / 2.0 * scale * phase)
    }
}

/// Which members `j` of `1..=j_max` are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSchedule {
    /// Every `j` in `1..=j_max`.
    #[default]
    All,
    /// Powers of two up to `j_max`, plus `j_max` itself.
    Dyadic,
}

impl IndexSchedule {
    pub fn indices(&self, j_max: u32) -> Vec<u32> {
        match self {
            IndexSchedule::All => (1..=j_max).collect(),
            IndexSchedule::Dyadic => {
                let mut v: Vec<u32> = std::iter::successors(Some(1u32), |j| j.checked_mul(2)).take_while(|&j| j <= j_max).collect();
                if v.last() != Some(&j_max) {
                    v.push(j_max);
                }
                v
            }
        }
    }
}

/// Sequence families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum RecipeKind {
    /// `f_j = map` for every `j`.
    Constant { map: AnalyticMap },
    /// `f_j(z) = z + sin(2 pi j x) / (2 pi j)`, limit the identity.
    Oscillation {
        #[serde(default = "standard_mode")]
        amplitude_mode: String,
    },
    /// `f_j = target * rho_{1/j}`, limit `target`.
    Mollified { target: AnalyticMap },
    /// `f_j = (a + da/j) z + (b + db/j) conj(z)`, limit `a z + b conj(z)`.
    AffineDrift { a: Complex64, b: Complex64, da: Complex64, db: Complex64 },
    /// Radial stretches with `alpha_j = alpha + dalpha / j`.
    RadialStretchFamily { alpha: f64, dalpha: f64 },
}

fn standard_mode() -> String {
    "standard".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecipe {
    #[serde(flatten)]
    pub kind: RecipeKind,
    pub j_max: u32,
    #[serde(default)]
    pub schedule: IndexSchedule,
}

/// Known analytic facts about a generated sequence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceFacts {
    pub description: String,
    /// `lim ||f_zbar,j - f_zbar||_{L^2}^2`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fzbar_l2_gap_squared: Option<f64>,
    /// `lim` of the Dirichlet energies of the members.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirichlet_energy_limit: Option<f64>,
    /// Dirichlet energy of the limit map.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirichlet_energy_of_limit: Option<f64>,
    /// Members converge in C^1 on compact sets avoiding this point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1_convergence_away_from: Option<Complex64>,
    /// Hilbert-Schmidt distortion of the limit when it is constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_distortion: Option<f64>,
}

impl SequenceRecipe {
    pub fn new(kind: RecipeKind, j_max: u32) -> SequenceRecipe {
        SequenceRecipe { kind, j_max, schedule: IndexSchedule::All }
    }

    pub fn dyadic(mut self) -> SequenceRecipe {
        self.schedule = IndexSchedule::Dyadic;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.j_max < 2 {
            return config(format!("j_max must be >= 2, got {}", self.j_max));
        }
        match &self.kind {
            RecipeKind::Constant { map } | RecipeKind::Mollified { target: map } => map.validate(),
            RecipeKind::Oscillation { amplitude_mode } if amplitude_mode == "standard" => Ok(()),
            RecipeKind::Oscillation { amplitude_mode } => config(format!("unknown amplitude mode {amplitude_mode:?}")),
            RecipeKind::AffineDrift { a, b, da, db } => {
                if [a, b, da, db].iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                    return config("affine drift schedule must be finite");
                }
                Ok(())
            }
            RecipeKind::RadialStretchFamily { alpha, dalpha } => {
                if !(alpha.is_finite() && dalpha.is_finite()) || (1..=self.j_max).any(|j| alpha + dalpha / j as f64 <= 0.0) {
                    return config("radial stretch schedule must stay positive");
                }
                Ok(())
            }
        }
    }

    /// Map number `j` and the limit map.
    pub fn member(&self, j: u32) -> AnalyticMap {
        let jf = j as f64;
        match &self.kind {
            RecipeKind::Constant { map } => map.clone(),
            RecipeKind::Oscillation { .. } => AnalyticMap::Oscillation { j },
            RecipeKind::Mollified { target } => AnalyticMap::Mollified { target: Box::new(target.clone()), radius: 1.0 / jf },
            RecipeKind::AffineDrift { a, b, da, db } => AnalyticMap::affine(a + da / jf, b + db / jf),
            RecipeKind::RadialStretchFamily { alpha, dalpha } => AnalyticMap::RadialStretch { alpha: alpha + dalpha / jf },
        }
    }

    pub fn limit(&self) -> AnalyticMap {
        match &self.kind {
            RecipeKind::Constant { map } => map.clone(),
            RecipeKind::Oscillation { .. } => AnalyticMap::identity(),
            RecipeKind::Mollified { target } => target.clone(),
            RecipeKind::AffineDrift { a, b, .. } => AnalyticMap::affine(*a, *b),
            RecipeKind::RadialStretchFamily { alpha, .. } => AnalyticMap::RadialStretch { alpha: *alpha },
        }
    }

    fn facts(&self, domain: Domain) -> SequenceFacts {
        match &self.kind {
            RecipeKind::Constant { .. } => SequenceFacts { description: "constant sequence".into(), ..Default::default() },
            RecipeKind::Oscillation { .. } => {
                let area = domain.area();
                SequenceFacts {
                    description: "oscillation z + sin(2 pi j x)/(2 pi j): weakly but not strongly convergent".into(),
                    fzbar_l2_gap_squared: Some(area / 8.0),
                    dirichlet_energy_limit: Some(2.5 * area),
                    dirichlet_energy_of_limit: Some(2.0 * area),
                    ..Default::default()
                }
            }
            RecipeKind::Mollified { target } => {
                let (away, k) = match target {
                    AnalyticMap::RadialStretch { alpha } => (Some(Complex64::new(0.0, 0.0)), Some((alpha * alpha + 1.0) / alpha)),
                    _ => (None, None),
                };
                SequenceFacts {
                    description: "mollification with radius 1/j: C^1 convergence on compact subsets".into(),
                    c1_convergence_away_from: away,
                    limit_distortion: k,
                    ..Default::default()
                }
            }
            RecipeKind::AffineDrift { a, b, .. } => {
                let (a2, b2) = (a.norm_sqr(), b.norm_sqr());
                SequenceFacts {
                    description: "affine drift, uniformly convergent derivatives at rate 1/j".into(),
                    limit_distortion: (a2 > b2).then(|| 2.0 * (a2 + b2) / (a2 - b2)),
                    ..Default::default()
                }
            }
            RecipeKind::RadialStretchFamily { alpha, .. } => SequenceFacts {
                description: "radial stretches with alpha_j -> alpha".into(),
                c1_convergence_away_from: Some(Complex64::new(0.0, 0.0)),
                limit_distortion: Some((alpha * alpha + 1.0) / alpha),
                ..Default::default()
            },
        }
    }
}

/// Sample every member and the limit on `mesh`.
pub fn generate(recipe: &SequenceRecipe, mesh: Arc<Mesh>) -> Result<SequenceHandle> {
    recipe.validate()?;
    let domain = mesh.domain();
    let limit_map = recipe.limit();
    if !limit_map.domain_ok(domain) || !recipe.member(1).domain_ok(domain) {
        return config(format!("recipe {:?} is not defined on a {:?} mesh", recipe.kind, domain));
    }
    let indices = recipe.schedule.indices(recipe.j_max);
    let members = indices.iter().map(|&j| sample_analytic(mesh.clone(), &recipe.member(j))).collect::<Result<Vec<MappingField>>>()?;
    let limit = sample_analytic(mesh, &limit_map)?;
    let mut handle = SequenceHandle::new(members, limit)?;
    handle.indices = indices;
    handle.facts = recipe.facts(domain);
    Ok(handle)
}
