//! Distortion energy families and the numerical oracles for their convexity
//! hypotheses.
//!
//! Every family is written as `Phi(x, y)` with `x` a norm of `Df` and `y = J`.
//! Through `k = x^2 / y` the Hilbert-Schmidt choice of `x` gives
//! `Phi(|Df|, J) = F(K)` exactly, with `K` the Hilbert-Schmidt distortion.
//! The integrand may additionally carry a Jacobian power `y^t` (the inverse,
//! pulled-back forms) and a weight `eta`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::fields::{DerivedField, PAR_THRESHOLD};
use crate::hopf::hyperbolic_weight_or_inf;
use crate::sum::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `K^p`
    LpMean { p: f64 },
    /// `exp(p K)`
    ExpP { p: f64 },
    /// `sum_{n<=N} (p K)^n / n!`
    TruncExp { p: f64, n: u32 },
    /// `x^2`, independent of the Jacobian.
    Dirichlet,
}

impl Family {
    pub fn p(&self) -> Option<f64> {
        match *self {
            Family::LpMean { p } | Family::ExpP { p } | Family::TruncExp { p, .. } => Some(p),
            Family::Dirichlet => None,
        }
    }

    fn depends_on_jacobian(&self) -> bool {
        !matches!(self, Family::Dirichlet)
    }

    /// Profile `F(k)` and its derivative `F'(k)` for the Jacobian-dependent families.
    pub fn profile(&self, k: f64) -> (f64, f64) {
        match *self {
            Family::LpMean { p } => {
                let kp1 = k.powf(p - 1.0);
                (kp1 * k, p * kp1)
            }
            Family::ExpP { p } => {
                let e = (p * k).exp();
                (e, p * e)
            }
            Family::TruncExp { p, n } => {
                let (s_n, s_nm1) = truncated_exp_pair(p * k, n);
                (s_n, p * s_nm1)
            }
            Family::Dirichlet => (k, 1.0),
        }
    }
}

/// `(S_N(a), S_{N-1}(a))` with `S_N(a) = sum_{n=0}^{N} a^n / n!` and `S_{-1} = 0`.
pub fn truncated_exp_pair(a: f64, n: u32) -> (f64, f64) {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = 0.0;
    for i in 1..=n {
        prev = sum;
        term *= a / i as f64;
        sum += term;
    }
    (sum, prev)
}

/// `S_N(a)`; `None` selects `exp(a)`.
pub fn truncated_exp(a: f64, n: Option<u32>) -> f64 {
    match n {
        Some(n) => truncated_exp_pair(a, n).0,
        None => a.exp(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    /// Hilbert-Schmidt norm `sqrt(2(|f_z|^2 + |f_zbar|^2))`.
    #[default]
    Hs,
    /// Operator norm `|f_z| + |f_zbar|`.
    Op,
}

impl NormChoice {
    pub fn eval(&self, fz: Complex64, fzbar: Complex64) -> f64 {
        match self {
            NormChoice::Hs => (2.0 * (fz.norm_sqr() + fzbar.norm_sqr())).sqrt(),
            NormChoice::Op => fz.norm() + fzbar.norm(),
        }
    }

    /// Lower bound of `x^2 / J` over orientation-preserving linear maps.
    pub fn min_distortion(&self) -> f64 {
        match self {
            NormChoice::Hs => 2.0,
            NormChoice::Op => 1.0,
        }
    }
}

/// Weight multiplying the integrand.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Weight {
    #[default]
    None,
    /// `1 / (1 - |z|^2)^2` at the element centroid.
    Hyperbolic,
    /// `1 / (1 - |f|^2)^2` at the image of the element centroid.
    HyperbolicImage,
    /// One value per triangle.
    Tabulated(Arc<Vec<f64>>),
}

/// A functional `f -> sum_T Phi(|Df|, J) J^t eta |T|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSpec {
    pub family: Family,
    pub norm: NormChoice,
    /// Exponent `t` of the extra Jacobian factor `y^t`.
    pub jac_exp: f64,
    pub weight: Weight,
    /// Exponent `s` used by the `Phi y^s` convexity probe.
    pub s: f64,
}

impl FunctionalSpec {
    pub fn new(family: Family) -> FunctionalSpec {
        FunctionalSpec { family, norm: NormChoice::Hs, jac_exp: 0.0, weight: Weight::None, s: default_s(2.0) }
    }

    pub fn lp_mean(p: f64) -> FunctionalSpec {
        FunctionalSpec::new(Family::LpMean { p })
    }

    pub fn exp_p(p: f64) -> FunctionalSpec {
        FunctionalSpec::new(Family::ExpP { p })
    }

    pub fn trunc_exp(p: f64, n: u32) -> FunctionalSpec {
        FunctionalSpec::new(Family::TruncExp { p, n })
    }

    pub fn dirichlet() -> FunctionalSpec {
        FunctionalSpec::new(Family::Dirichlet)
    }

    pub fn with_jac_exp(mut self, t: f64) -> FunctionalSpec {
        self.jac_exp = t;
        self
    }

    pub fn with_norm(mut self, norm: NormChoice) -> FunctionalSpec {
        self.norm = norm;
        self
    }

    pub fn with_weight(mut self, weight: Weight) -> FunctionalSpec {
        self.weight = weight;
        self
    }

    pub fn with_s(mut self, s: f64) -> FunctionalSpec {
        self.s = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.family.p() {
            if !(p > 0.0 && p.is_finite()) {
                return config(format!("family exponent p must be positive, got {p}"));
            }
        }
        if !(self.jac_exp >= 0.0 && self.jac_exp.is_finite()) {
            return config(format!("jac_exp must be >= 0, got {}", self.jac_exp));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return config(format!("s must lie in (0, 1), got {}", self.s));
        }
        if let Weight::Tabulated(w) = &self.weight {
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return config("tabulated weights must be finite and non-negative");
            }
        }
        Ok(())
    }

    /// `Phi(x, y) * y^t`; infinite for `y <= 0` unless the integrand ignores `y`.
    pub fn phi(&self, x: f64, y: f64) -> f64 {
        let needs_y = self.family.depends_on_jacobian() || self.jac_exp != 0.0;
        if needs_y && !(y > 0.0) {
            return f64::INFINITY;
        }
        let base = match self.family {
            Family::Dirichlet => x * x,
            family => family.profile(x * x / y).0,
        };
        if self.jac_exp == 0.0 {
            base
        } else {
            base * y.powf(self.jac_exp)
        }
    }

    /// `(g, dg/dx, dg/dy)` for `g(x, y) = Phi(x, y) y^t` at `y > 0`.
    pub fn phi_with_partials(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (base, bx, by) = match self.family {
            Family::Dirichlet => (x * x, 2.0 * x, 0.0),
            family => {
                let k = x * x / y;
                let (f, df) = family.profile(k);
                (f, df * 2.0 * x / y, -df * k / y)
            }
        };
        if self.jac_exp == 0.0 {
            (base, bx, by)
        } else {
            let yt = y.powf(self.jac_exp);
            (base * yt, bx * yt, by * yt + base * self.jac_exp * yt / y)
        }
    }

    /// Weight of triangle `t` for a field with the given geometry.
    pub(crate) fn weight_at(&self, t: usize, centroid: Complex64, image_centroid: Complex64) -> f64 {
        match &self.weight {
            Weight::None => 1.0,
            Weight::Hyperbolic => hyperbolic_weight_or_inf(centroid),
            Weight::HyperbolicImage => hyperbolic_weight_or_inf(image_centroid),
            Weight::Tabulated(w) => w[t],
        }
    }

    pub fn to_json(&self) -> FunctionalSpecJson {
        let (family, p, n) = match self.family {
            Family::LpMean { p } => ("lp_mean", p, 0),
            Family::ExpP { p } => ("exp_p", p, 0),
            Family::TruncExp { p, n } => ("trunc_exp", p, n),
            Family::Dirichlet => ("dirichlet", 1.0, 0),
        };
        let weight = match self.weight {
            Weight::None | Weight::Tabulated(_) => "none",
            Weight::Hyperbolic => "hyperbolic",
            Weight::HyperbolicImage => "hyperbolic_image",
        };
        FunctionalSpecJson { family: family.into(), p, n, norm: self.norm, jac_exp: self.jac_exp, weight: weight.into(), s: Some(self.s) }
    }

    pub fn from_json(doc: &FunctionalSpecJson) -> Result<FunctionalSpec> {
        let family = match doc.family.as_str() {
            "lp_mean" => Family::LpMean { p: doc.p },
            "exp_p" => Family::ExpP { p: doc.p },
            "trunc_exp" => Family::TruncExp { p: doc.p, n: doc.n },
            "dirichlet" => Family::Dirichlet,
            other => return config(format!("unknown family {other:?}")),
        };
        let weight = match doc.weight.as_str() {
            "none" => Weight::None,
            "hyperbolic" => Weight::Hyperbolic,
            "hyperbolic_image" => Weight::HyperbolicImage,
            other => return config(format!("unknown weight {other:?}")),
        };
        let spec = FunctionalSpec { family, norm: doc.norm, jac_exp: doc.jac_exp, weight, s: doc.s.unwrap_or_else(|| default_s(2.0)) };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for FunctionalSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FunctionalSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = FunctionalSpecJson::deserialize(deserializer)?;
        FunctionalSpec::from_json(&doc).map_err(serde::de::Error::custom)
    }
}

/// Wire form of [`FunctionalSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpecJson {
    pub family: String,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(rename = "N", default)]
    pub n: u32,
    #[serde(default)]
    pub norm: NormChoice,
    #[serde(default)]
    pub jac_exp: f64,
    #[serde(default = "none_weight")]
    pub weight: String,
    #[serde(default)]
    pub s: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn none_weight() -> String {
    "none".into()
}

/// `min(0.01, (1 - 1/p)/2)`: inside `(0, 1 - 1/p)` for every `p > 1`.
pub fn default_s(p: f64) -> f64 {
    let upper = 1.0 - 1.0 / p;
    if upper > 0.0 {
        0.01f64.min(upper / 2.0)
    } else {
        0.01
    }
}

/// Pointwise integrand `Phi(|Df|, J) J^t` for every triangle (weight excluded).
pub fn integrand_values(spec: &FunctionalSpec, derived: &DerivedField) -> Vec<f64> {
    (0..derived.len()).map(|t| spec.phi(spec.norm.eval(derived.fz[t], derived.fzbar[t]), derived.jacobian[t])).collect()
}

/// Per-triangle weights of `spec` on `derived`.
pub fn weight_values(spec: &FunctionalSpec, derived: &DerivedField) -> Vec<f64> {
    let mesh = derived.mesh();
    (0..derived.len()).map(|t| spec.weight_at(t, mesh.centroid(t), derived.image_centroids[t])).collect()
}

fn weighted_term(value: f64, weight: f64, area: f64) -> f64 {
    if value.is_infinite() || weight.is_infinite() {
        f64::INFINITY
    } else {
        value * weight * area
    }
}

/// `sum_T Phi(|Df|, J) J^t eta(centroid) |T|`; infinite when any term is.
pub fn energy(spec: &FunctionalSpec, derived: &DerivedField) -> f64 {
    let mesh = derived.mesh();
    let areas = mesh.areas();
    let term = |t: usize| {
        let x = spec.norm.eval(derived.fz[t], derived.fzbar[t]);
        let value = spec.phi(x, derived.jacobian[t]);
        weighted_term(value, spec.weight_at(t, mesh.centroid(t), derived.image_centroids[t]), areas[t])
    };
    let terms: Vec<f64> = if derived.len() >= PAR_THRESHOLD {
        (0..derived.len()).into_par_iter().map(term).collect()
    } else {
        (0..derived.len()).map(term).collect()
    };
    pairwise_sum(&terms)
}

/// Energy of the inverse map `h = f^{-1}` on the image domain,
/// `int_{f(Omega)} Phi(|Dh|, J_h) J_h^t eta dw`, evaluated element by element
/// from the inverse of each affine piece (`h_w = conj(f_z)/J`,
/// `h_wbar = -f_zbar/J`, `dw = J dz`) without building the image mesh.
///
/// `Weight::Hyperbolic` is evaluated at the image point `w`, and
/// `Weight::HyperbolicImage` at `h(w)`, i.e. the source centroid.
pub fn inverse_energy(spec: &FunctionalSpec, derived: &DerivedField) -> Result<f64> {
    let (worst, jmin) = derived.min_jacobian();
    if !(jmin > 0.0) {
        return domain(format!("inverse undefined: J = {jmin:e} on triangle {worst}"));
    }
    let mesh = derived.mesh();
    let areas = mesh.areas();
    let terms: Vec<f64> = (0..derived.len())
        .map(|t| {
            let j = derived.jacobian[t];
            let hw = derived.fz[t].conj() / j;
            let hwbar = -derived.fzbar[t] / j;
            let jh = hw.norm_sqr() - hwbar.norm_sqr();
            let value = spec.phi(spec.norm.eval(hw, hwbar), jh);
            let weight = match &spec.weight {
                Weight::Hyperbolic => hyperbolic_weight_or_inf(derived.image_centroids[t]),
                Weight::HyperbolicImage => hyperbolic_weight_or_inf(mesh.centroid(t)),
                _ => spec.weight_at(t, mesh.centroid(t), derived.image_centroids[t]),
            };
            weighted_term(value, weight, j * areas[t])
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Both sides of the polyconvexity inequality for `x^2 / y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyconvexCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `x^2/y - x0^2/y0 >= (2 x0/y0)(x - x0) - (x0^2/y0^2)(y - y0)`.
pub fn polyconvex_lower_bound(x: f64, y: f64, x0: f64, y0: f64) -> PolyconvexCheck {
    let lhs = x * x / y - x0 * x0 / y0;
    let rhs = 2.0 * x0 / y0 * (x - x0) - x0 * x0 / (y0 * y0) * (y - y0);
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    PolyconvexCheck { lhs, rhs, holds: lhs >= rhs - 1e-12 * scale }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyconvexReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `rhs - lhs` seen, relative to `max(1, |lhs|, |rhs|)`.
    pub worst_violation: f64,
}

impl PolyconvexReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// [`polyconvex_lower_bound`] at random pairs of points of `region`.
pub fn polyconvex_probe(samples: usize, region: &ProbeBox, seed: u64) -> Result<PolyconvexReport> {
    region.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PolyconvexReport { samples, violations: 0, worst_violation: 0.0 };
    for _ in 0..samples {
        let x = rng.gen_range(region.x[0]..=region.x[1]);
        let y = rng.gen_range(region.y[0]..=region.y[1]);
        let x0 = rng.gen_range(region.x[0]..=region.x[1]);
        let y0 = rng.gen_range(region.y[0]..=region.y[1]);
        let check = polyconvex_lower_bound(x, y, x0, y0);
        if !check.holds {
            report.violations += 1;
            let scale = check.lhs.abs().max(check.rhs.abs()).max(1.0);
            report.worst_violation = report.worst_violation.max((check.rhs - check.lhs) / scale);
        }
    }
    Ok(report)
}

/// Rectangle `[x_lo, x_hi] x [y_lo, y_hi]` of `(|Df|, J)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Default for ProbeBox {
    fn default() -> Self {
        ProbeBox { x: [0.0, 5.0], y: [0.1, 5.0] }
    }
}

impl ProbeBox {
    fn validate(&self) -> Result<()> {
        if !(self.x[0] >= 0.0 && self.x[1] > self.x[0] && self.y[0] > 0.0 && self.y[1] > self.y[0]) {
            return config(format!("probe box {:?} x {:?} must lie in x >= 0, y > 0", self.x, self.y));
        }
        Ok(())
    }
}

/// Result of a randomized midpoint-convexity probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub s: f64,
    /// Pairs drawn only from `x^2 >= c y`, `c` the smallest possible distortion.
    pub admissible_only: bool,
    pub violations: usize,
    pub worst_violation: f64,
    pub violations_weighted: usize,
    pub worst_violation_weighted: f64,
}

impl ConvexityReport {
    pub fn ok(&self) -> bool {
        self.violations == 0 && self.violations_weighted == 0
    }
}

/// Probe settings shared by [`convexity_probe`] and [`convexity_probe_fn`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub samples: usize,
    pub region: ProbeBox,
    /// Restrict samples to pairs realizable as `(|Df|, J)` of an
    /// orientation-preserving linear map, `x^2 >= min_distortion * y`.
    pub admissible_only: bool,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { samples: 100_000, region: ProbeBox::default(), admissible_only: true, seed: 0 }
    }
}

/// Midpoint convexity of `Phi` and of `Phi y^s` for a family.
pub fn convexity_probe(spec: &FunctionalSpec, s: f64, settings: &ProbeSettings) -> Result<ConvexityReport> {
    let base = FunctionalSpec { weight: Weight::None, jac_exp: 0.0, ..spec.clone() };
    let cone = if settings.admissible_only { Some(spec.norm.min_distortion()) } else { None };
    probe_impl(&|x, y| base.phi(x, y), s, settings, cone)
}

/// Midpoint convexity probe for an arbitrary integrand.
pub fn convexity_probe_fn(phi: &(dyn Fn(f64, f64) -> f64 + Sync), s: f64, settings: &ProbeSettings) -> Result<ConvexityReport> {
    let cone = if settings.admissible_only { Some(NormChoice::Hs.min_distortion()) } else { None };
    probe_impl(phi, s, settings, cone)
}

fn sample_point(rng: &mut ChaCha8Rng, region: &ProbeBox, cone: Option<f64>) -> Option<(f64, f64)> {
    for _ in 0..1000 {
        let x = rng.gen_range(region.x[0]..=region.x[1]);
        let y = rng.gen_range(region.y[0]..=region.y[1]);
        if cone.map_or(true, |c| x * x >= c * y) {
            return Some((x, y));
        }
    }
    None
}

fn midpoint_violation(phi: &dyn Fn(f64, f64) -> f64, p1: (f64, f64), p2: (f64, f64)) -> f64 {
    let (a, b) = (phi(p1.0, p1.1), phi(p2.0, p2.1));
    let m = phi(0.5 * (p1.0 + p2.0), 0.5 * (p1.1 + p2.1));
    let scale = a.abs().max(b.abs()).max(m.abs()).max(1.0);
    let excess = m - 0.5 * (a + b);
    if excess > 1e-10 * scale {
        excess / scale
    } else {
        0.0
    }
}

fn probe_impl(phi: &(dyn Fn(f64, f64) -> f64 + Sync), s: f64, settings: &ProbeSettings, cone: Option<f64>) -> Result<ConvexityReport> {
    settings.region.validate()?;
    if !(s > 0.0 && s < 1.0) {
        return config(format!("s must lie in (0, 1), got {s}"));
    }
    let weighted = |x: f64, y: f64| phi(x, y) * y.powf(s);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut report = ConvexityReport {
        samples: settings.samples,
        s,
        admissible_only: cone.is_some(),
        violations: 0,
        worst_violation: 0.0,
        violations_weighted: 0,
        worst_violation_weighted: 0.0,
    };
    for _ in 0..settings.samples {
        let (Some(p1), Some(p2)) = (sample_point(&mut rng, &settings.region, cone), sample_point(&mut rng, &settings.region, cone)) else {
            return config("probe region contains no admissible points");
        };
        let v = midpoint_violation(phi, p1, p2);
        if v > 0.0 {
            report.violations += 1;
            report.worst_violation = report.worst_violation.max(v);
        }
        let w = midpoint_violation(&weighted, p1, p2);
        if w > 0.0 {
            report.violations_weighted += 1;
            report.worst_violation_weighted = report.worst_violation_weighted.max(w);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub p: f64,
    pub n_max: u32,
    pub samples: usize,
    pub violations: usize,
}

impl MonotoneReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// `TruncExp(p, N) <= TruncExp(p, N+1) <= ExpP(p)` for every `N < n_max` at
/// random `(x, y)` in `region`.
pub fn monotone_truncation_check(p: f64, n_max: u32, samples: usize, region: &ProbeBox, seed: u64) -> Result<MonotoneReport> {
    region.validate()?;
    if !(p > 0.0) {
        return config(format!("p must be positive, got {p}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = FunctionalSpec::exp_p(p);
    let mut violations = 0;
    for _ in 0..samples {
        let x = rng.gen_range(region.x[0]..=region.x[1]);
        let y = rng.gen_range(region.y[0]..=region.y[1]);
        let limit = exp.phi(x, y);
        let seq = truncation_values(p, x, y, n_max);
        let bad = seq.windows(2).any(|w| w[0] > w[1]) || seq.iter().any(|&v| v > limit * (1.0 + 1e-12));
        if bad {
            violations += 1;
        }
    }
    Ok(MonotoneReport { p, n_max, samples, violations })
}

/// `TruncExp(p, N)(x, y)` for `N = 0..=n_max`.
pub fn truncation_values(p: f64, x: f64, y: f64, n_max: u32) -> Vec<f64> {
    let a = p * x * x / y;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let (mut term, mut sum) = (1.0, 1.0);
    out.push(sum);
    for n in 1..=n_max {
        term *= a / n as f64;
        sum += term;
        out.push(sum);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub exponent: f64,
    pub samples: usize,
    pub violations: usize,
    pub worst_violation: f64,
}

/// The tangent-line bound `a^q - b^q <= q b^(q-1) (a - b)` for `q = s p'` in
/// `(0, 1)`, at random positive pairs.
pub fn concavity_bound(a: f64, b: f64, q: f64) -> (f64, f64) {
    (a.powf(q) - b.powf(q), q * b.powf(q - 1.0) * (a - b))
}

pub fn concavity_probe(s: f64, p_prime: f64, samples: usize, seed: u64) -> Result<ConcavityReport> {
    let q = s * p_prime;
    if !(q > 0.0 && q < 1.0) {
        return config(format!("s p' = {q} must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConcavityReport { exponent: q, samples, violations: 0, worst_violation: 0.0 };
    for _ in 0..samples {
        // log-uniform over eight decades
        let a = 10f64.powf(rng.gen_range(-4.0..4.0));
        let b = 10f64.powf(rng.gen_range(-4.0..4.0));
        let (lhs, rhs) = concavity_bound(a, b, q);
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        if lhs > rhs + 1e-12 * scale {
            report.violations += 1;
            report.worst_violation = report.worst_violation.max((lhs - rhs) / scale);
        }
    }
    Ok(report)
}
