//! Run configuration: one JSON document per run.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use distortion_core::functionals::{default_s, ProbeBox};
use distortion_core::{
    AnalyticMap, BoundaryData, DiagnoseParams, Error, Family, FunctionalSpec, HopfWeight, Mesh, MinimizeConfig, Result, SequenceRecipe,
    Truncation,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Mesh,
    Minimize,
    Sweep,
    Diagnose,
    Hopf,
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::Minimize => "minimize",
            Command::Sweep => "sweep",
            Command::Diagnose => "diagnose",
            Command::Hopf => "hopf",
            Command::Oracle => "oracle",
        }
    }
}

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Unit disk at a refinement level.
    Disk { level: u32 },
    /// `nx x ny` cells over `[lo, hi]`, then `refine` uniform refinements.
    Rect {
        nx: usize,
        ny: usize,
        #[serde(default = "origin")]
        lo: [f64; 2],
        #[serde(default = "unit")]
        hi: [f64; 2],
        #[serde(default)]
        refine: u32,
    },
    /// A mesh JSON written by the `mesh` command; relative paths resolve against the config file.
    File { path: PathBuf },
}

fn origin() -> [f64; 2] {
    [0.0, 0.0]
}

fn unit() -> [f64; 2] {
    [1.0, 1.0]
}

impl DomainSpec {
    pub fn build(&self, base: Option<&Path>) -> Result<Arc<Mesh>> {
        let mesh = match self {
            DomainSpec::Disk { level } => Mesh::disk(*level)?,
            DomainSpec::Rect { nx, ny, lo, hi, refine } => {
                let c = |v: [f64; 2]| distortion_core::Complex64::new(v[0], v[1]);
                Mesh::rect(*nx, *ny, c(*lo), c(*hi))?.refined(*refine)?
            }
            DomainSpec::File { path } => {
                let resolved = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Mesh::read_json(&resolved)?
            }
        };
        Ok(Arc::new(mesh))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "one")]
    pub p: f64,
    pub n_list: Vec<u32>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfConfig {
    /// Defaults to the `p` of the functional.
    #[serde(default)]
    pub p: Option<f64>,
    /// Defaults to the `N` of a truncated functional, otherwise the full series.
    #[serde(default)]
    pub truncation: Option<Truncation>,
    #[serde(default)]
    pub weight: HopfWeight,
    /// Evaluate on this closed-form map instead of a minimiser.
    #[serde(default)]
    pub map: Option<AnalyticMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Integrability exponent of the Radon-Riesz diagnostic; fixes the default `s` and the conjugate `p'`.
    #[serde(default = "two")]
    pub p_rr: f64,
    #[serde(default)]
    pub s: Option<f64>,
    /// Largest truncation order in the monotonicity check.
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default)]
    pub region: Option<ProbeBox>,
    /// Families to probe; the four default families when empty.
    #[serde(default)]
    pub families: Vec<FunctionalSpec>,
}

fn default_samples() -> usize {
    100_000
}

fn two() -> f64 {
    2.0
}

fn default_n_max() -> u32 {
    16
}

impl Default for OracleConfig {
    fn default() -> OracleConfig {
        OracleConfig { samples: default_samples(), p_rr: 2.0, s: None, n_max: default_n_max(), region: None, families: Vec::new() }
    }
}

impl OracleConfig {
    pub fn s(&self) -> f64 {
        self.s.unwrap_or_else(|| default_s(self.p_rr))
    }

    pub fn families(&self) -> Vec<FunctionalSpec> {
        if self.families.is_empty() {
            vec![FunctionalSpec::lp_mean(2.0), FunctionalSpec::exp_p(1.0), FunctionalSpec::trunc_exp(1.0, 4), FunctionalSpec::dirichlet()]
        } else {
            self.families.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimize: Option<MinimizeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<SequenceRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnose: Option<DiagnoseParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Overrides the seeds of every sub-configuration when present; `--seed` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn missing<T>(what: &str, command: Command) -> Result<T> {
    Err(Error::Config(format!("command {} needs a `{what}` section", command.name())))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    /// Push the top-level seed into every seeded sub-configuration.
    pub fn apply_seed(&mut self, seed: Option<u64>) {
        if seed.is_some() {
            self.seed = seed;
        }
        let Some(seed) = self.seed else { return };
        if let Some(m) = &mut self.minimize {
            m.seed = seed;
        }
        if let Some(d) = &mut self.diagnose {
            d.seed = seed;
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.or(self.minimize.as_ref().map(|m| m.seed)).or(self.diagnose.as_ref().map(|d| d.seed)).unwrap_or(0)
    }

    pub fn domain(&self) -> Result<&DomainSpec> {
        self.domain.as_ref().map_or_else(|| missing("domain", self.command), Ok)
    }

    pub fn functional(&self) -> Result<&FunctionalSpec> {
        self.functional.as_ref().map_or_else(|| missing("functional", self.command), Ok)
    }

    pub fn boundary(&self) -> BoundaryData {
        self.boundary.clone().unwrap_or(BoundaryData::Identity)
    }

    pub fn minimize_config(&self) -> MinimizeConfig {
        self.minimize.clone().unwrap_or_default()
    }

    pub fn sweep(&self) -> Result<&SweepConfig> {
        self.sweep.as_ref().map_or_else(|| missing("sweep", self.command), Ok)
    }

    pub fn diagnose(&self) -> Result<&DiagnoseParams> {
        self.diagnose.as_ref().map_or_else(|| missing("diagnose", self.command), Ok)
    }

    /// Template of a sweep: the functional's norm, Jacobian exponent and weight.
    pub fn sweep_template(&self) -> FunctionalSpec {
        self.functional.clone().unwrap_or_else(|| FunctionalSpec::trunc_exp(1.0, 0))
    }

    /// Everything that can be checked before any numerics run.
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = &self.functional {
            f.validate()?;
        }
        if let Some(m) = &self.minimize {
            m.validate()?;
        }
        if let Some(d) = &self.diagnose {
            d.validate()?;
        }
        if let Some(r) = &self.recipe {
            r.validate()?;
        }
        if let Some(s) = &self.sweep {
            if !(s.p > 0.0 && s.p.is_finite()) {
                return Err(Error::Config(format!("sweep p must be positive, got {}", s.p)));
            }
            if s.n_list.is_empty() || s.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("sweep n_list must be non-empty and strictly increasing".into()));
            }
        }
        if let Some(h) = &self.hopf {
            if let Some(map) = &h.map {
                map.validate()?;
            }
            if let Some(p) = h.p {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::Config(format!("hopf p must be positive, got {p}")));
                }
            }
        }
        if let Some(o) = &self.oracle {
            if o.samples == 0 || !(o.p_rr > 1.0) || o.n_max == 0 {
                return Err(Error::Config("oracle needs samples > 0, p_rr > 1 and n_max > 0".into()));
            }
            for f in &o.families {
                f.validate()?;
            }
        }
        match self.command {
            Command::Mesh => self.domain().map(|_| ()),
            Command::Minimize => self.domain().and(self.functional()).map(|_| ()),
            Command::Sweep => self.domain().and(self.sweep()).map(|_| ()),
            Command::Diagnose => {
                self.domain()?;
                self.diagnose()?;
                match (&self.recipe, &self.sweep) {
                    (Some(_), None) => self.functional().map(|_| ()),
                    (None, Some(_)) => Ok(()),
                    _ => Err(Error::Config("diagnose needs exactly one of `recipe` and `sweep`".into())),
                }
            }
            Command::Hopf => {
                self.domain()?;
                let hopf = self.hopf.clone().unwrap_or(HopfConfig { p: None, truncation: None, weight: HopfWeight::None, map: None });
                if hopf.map.is_none() {
                    self.functional()?;
                }
                if hopf.p.is_none() && self.functional.as_ref().and_then(|f| f.family.p()).is_none() {
                    return Err(Error::Config("hopf needs `hopf.p` or a functional with an exponent".into()));
                }
                Ok(())
            }
            Command::Oracle => Ok(()),
        }
    }

    /// Exponent and truncation of the Hopf quantity.
    pub fn hopf_settings(&self) -> (f64, Truncation, HopfWeight) {
        let hopf = self.hopf.clone().unwrap_or(HopfConfig { p: None, truncation: None, weight: HopfWeight::None, map: None });
        let family = self.functional.as_ref().map(|f| f.family);
        let p = hopf.p.or(family.and_then(|f| f.p())).unwrap_or(1.0);
        let truncation = hopf.truncation.unwrap_or(match family {
            Some(Family::TruncExp { n, .. }) => Truncation::Finite(n),
            _ => Truncation::Infinite,
        });
        (p, truncation, hopf.weight)
    }
}
