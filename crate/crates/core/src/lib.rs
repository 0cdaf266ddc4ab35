//! Distortion energies, orientation-preserving minimisers and Radon-Riesz
//! convergence diagnostics for piecewise-affine planar mappings.

pub mod convergence;
pub mod error;
pub mod fields;
pub mod functionals;
pub mod geometry;
pub mod hopf;
pub mod linalg;
pub mod minimize;
pub mod quadrature;
pub mod sequences;
pub mod sum;

pub use num_complex::Complex64;

pub use convergence::{
    good_set, jacobian_area_identity, lr_gap, lsc_check, orlicz_norm, radon_riesz_diagnose, sobolev_norm, weak_probe, ConvergenceReport,
    DiagnoseParams, Quantity, RList, SequenceHandle, Subdomain, Verdict,
};
pub use error::{Error, Result};
pub use fields::{finite_distortion_report, sample_analytic, wirtinger_derivatives, DerivedField, MappingField};
pub use functionals::{
    concavity_probe, convexity_probe, energy, inverse_energy, monotone_truncation_check, polyconvex_lower_bound, polyconvex_probe, Family,
    FunctionalSpec, NormChoice, Weight,
};
pub use geometry::{Domain, Mesh};
pub use hopf::{ahlfors_hopf, holomorphy_residual, hopf_differential, hyperbolic_weight, HopfField, HopfWeight, Truncation};
pub use minimize::{energy_gradient, minimize_energy, minimize_from, truncation_sweep, BoundaryData, MinimizeConfig, MinimizeResult};
pub use sequences::{generate, radial_stretch_facts, AnalyticMap, RecipeKind, SequenceRecipe};
