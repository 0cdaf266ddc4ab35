//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use distortion_core::{generate, AnalyticMap, Complex64, FunctionalSpec, MappingField, Mesh, RecipeKind, SequenceHandle, SequenceRecipe};

pub fn disk(level: u32) -> Arc<Mesh> {
    Arc::new(Mesh::disk(level).expect("disk mesh"))
}

/// A smooth orientation-preserving map of the disk away from the identity.
pub fn smooth_map(mesh: Arc<Mesh>) -> MappingField {
    MappingField::from_fn(mesh, |z| z + 0.1 * z * z + Complex64::new(0.0, 0.05) * z * z.conj()).expect("mapping")
}

pub fn specs() -> Vec<(&'static str, FunctionalSpec)> {
    vec![
        ("lp_mean", FunctionalSpec::lp_mean(2.0)),
        ("exp_p", FunctionalSpec::exp_p(1.0)),
        ("trunc_exp", FunctionalSpec::trunc_exp(1.0, 8)),
        ("dirichlet", FunctionalSpec::dirichlet()),
    ]
}

/// Mollified radial stretch with `j_max` members.
pub fn mollified_sequence(level: u32, j_max: u32) -> SequenceHandle {
    let recipe = SequenceRecipe::new(RecipeKind::Mollified { target: AnalyticMap::RadialStretch { alpha: 2.0 } }, j_max);
    generate(&recipe, disk(level)).expect("sequence")
}
