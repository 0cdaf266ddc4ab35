//! Randomized invariants of the public API.

use std::sync::Arc;

use distortion_core::fields::ElementQuantities;
use distortion_core::functionals::truncation_values;
use distortion_core::minimize::MinimizeStatus;
use distortion_core::sequences::IndexSchedule;
use distortion_core::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disk(level: u32) -> Arc<Mesh> {
    Arc::new(Mesh::disk(level).unwrap())
}

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(a, b)| c(a, b))
}

/// `a z + b conj(z)` with `|b| <= 0.9 |a|`.
fn orientation_preserving() -> impl Strategy<Value = (Complex64, Complex64)> {
    (complex(2.0), complex(1.0)).prop_filter_map("needs |a| > 0.1", |(a, b)| {
        if a.norm() < 0.1 {
            return None;
        }
        let b = if b.norm() > 0.9 * a.norm() { b * (0.9 * a.norm() / b.norm()) } else { b };
        Some((a, b))
    })
}

fn families() -> Vec<FunctionalSpec> {
    vec![
        FunctionalSpec::lp_mean(1.0),
        FunctionalSpec::lp_mean(2.5),
        FunctionalSpec::exp_p(0.5),
        FunctionalSpec::trunc_exp(1.0, 3),
        FunctionalSpec::dirichlet(),
        FunctionalSpec::lp_mean(2.0).with_jac_exp(1.0),
        FunctionalSpec::exp_p(1.0).with_norm(NormChoice::Op),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_quadruples_and_keeps_rect_area(nx in 1usize..6, ny in 1usize..6, w in 0.5..3.0f64, h in 0.5..3.0f64) {
        let m = Mesh::rect(nx, ny, c(-1.0, 0.5), c(-1.0 + w, 0.5 + h)).unwrap();
        let r = m.refine().unwrap();
        prop_assert_eq!(r.triangle_count(), 4 * m.triangle_count());
        prop_assert!((r.total_area() - w * h).abs() <= 1e-12 * w * h);
        prop_assert!(m.areas().iter().chain(r.areas()).all(|&a| a > 0.0));
    }

    #[test]
    fn construction_is_bitwise_deterministic(level in 0u32..4, nx in 1usize..5, ny in 1usize..5) {
        let bits = |m: &Mesh| m.nodes().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>();
        let (a, b) = (Mesh::disk(level).unwrap(), Mesh::disk(level).unwrap());
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(a.triangles(), b.triangles());
        prop_assert!(a.areas().iter().all(|&x| x > 0.0));
        let (a, b) = (Mesh::unit_square(nx, ny).unwrap(), Mesh::unit_square(nx, ny).unwrap());
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn distortion_is_two_exactly_on_conformal_elements(fz in complex(3.0), fzbar in complex(3.0)) {
        prop_assume!(fz.norm() > 1e-3);
        let conformal = ElementQuantities::from_wirtinger(fz, c(0.0, 0.0));
        prop_assert!((conformal.hs_distortion - 2.0).abs() <= 1e-14);
        let q = ElementQuantities::from_wirtinger(fz, fzbar);
        if q.jacobian > 0.0 && fzbar.norm() > 1e-6 * fz.norm() {
            prop_assert!(q.hs_distortion > 2.0);
            let mu2 = (fzbar / fz).norm_sqr();
            prop_assert!((q.hs_distortion - 2.0 * (1.0 + mu2) / (1.0 - mu2)).abs() <= 1e-12 * q.hs_distortion);
        }
    }

    #[test]
    fn integrand_is_nondecreasing_in_x(x in 0.0..6.0f64, dx in 0.0..2.0f64, y in 0.1..6.0f64) {
        for spec in families() {
            let (lo, hi) = (spec.phi(x, y), spec.phi(x + dx, y));
            prop_assert!(hi >= lo, "{spec:?}: phi({x}) = {lo} > phi({}) = {hi}", x + dx);
            if dx > 1e-3 && x > 1e-3 && hi.is_finite() {
                prop_assert!(hi > lo);
            }
        }
    }

    #[test]
    fn truncations_increase_to_the_exponential(p in 0.1..2.0f64, x in 0.0..4.0f64, y in 0.2..4.0f64) {
        let values = truncation_values(p, x, y, 400);
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let limit = FunctionalSpec::exp_p(p).phi(x, y);
        prop_assert!(values.iter().all(|&v| v <= limit * (1.0 + 1e-12)));
        prop_assert!((values[400] - limit).abs() <= 1e-10 * limit);
    }

    #[test]
    fn dirichlet_energy_is_hs_seminorm(seed in 0u64..500, amp in 0.0..0.3f64) {
        use rand::{Rng, SeedableRng};
        let m = disk(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = amp * c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f = MappingField::from_fn(m, |z| z + k * z * z).unwrap();
        let d = wirtinger_derivatives(&f);
        let direct: f64 = (0..d.len()).map(|t| 2.0 * (d.fz[t].norm_sqr() + d.fzbar[t].norm_sqr()) * d.areas()[t]).sum();
        let e = energy(&FunctionalSpec::dirichlet(), &d);
        prop_assert!((e - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn change_of_variables_is_exact_for_affine_maps((a, b) in orientation_preserving(), p in 0.2..1.5f64) {
        let d = wirtinger_derivatives(&MappingField::from_fn(disk(2), |z| a * z + b * z.conj()).unwrap());
        let spec = FunctionalSpec::exp_p(p);
        let (fwd, inv) = (energy(&spec, &d), inverse_energy(&spec.clone().with_jac_exp(1.0), &d).unwrap());
        prop_assert!((fwd - inv).abs() <= 1e-10 * fwd);
    }

    #[test]
    fn gradient_vanishes_on_the_boundary(seed in 0u64..500) {
        use rand::{Rng, SeedableRng};
        let m = disk(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = 0.2 * m.mesh_size();
        let values = m
            .nodes()
            .iter()
            .enumerate()
            .map(|(v, &z)| if m.is_boundary(v) { z } else { z + h * c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) })
            .collect();
        let f = MappingField::new(m.clone(), values).unwrap();
        for spec in families() {
            let g = energy_gradient(&spec, &f, 1e-12).unwrap();
            for &v in m.boundary_nodes() {
                prop_assert_eq!(g[v], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn constant_sequences_have_zero_gaps(r in 0.5..4.0f64, (a, b) in orientation_preserving()) {
        let recipe = SequenceRecipe::new(RecipeKind::Constant { map: AnalyticMap::affine(a, b) }, 4);
        let seq = generate(&recipe, disk(1)).unwrap();
        for q in [Quantity::Df, Quantity::Fz, Quantity::Fzbar, Quantity::J, Quantity::Mu] {
            let gap = lr_gap(&seq, q, r, &Subdomain::All).unwrap();
            prop_assert!(gap.values.iter().all(|&v| v == 0.0), "{q:?}: {:?}", gap.values);
        }
    }

    #[test]
    fn orlicz_norm_is_homogeneous_and_monotone(k in -3.0..3.0f64, grow in 1.0..2.0f64, (a, b) in orientation_preserving()) {
        prop_assume!(k.abs() > 1e-3);
        let f = MappingField::from_fn(disk(1), |z| a * z + b * z.conj()).unwrap();
        let base = orlicz_norm(&f, &Subdomain::All).unwrap();
        let scaled = orlicz_norm(&f.scaled(c(k, 0.0)), &Subdomain::All).unwrap();
        prop_assert!((scaled - k.abs() * base).abs() <= 1e-8 * scaled.max(1e-300));
        let bigger = orlicz_norm(&MappingField::from_fn(disk(1), |z| grow * a * z + grow * b * z.conj()).unwrap(), &Subdomain::All).unwrap();
        prop_assert!(bigger >= base * (1.0 - 1e-12));
    }

    #[test]
    fn lsc_holds_on_affine_sequences_drifting_from_above(a in 0.5..2.0f64, b in 0.0..0.4f64, db in 0.0..0.04f64) {
        // growing |f_zbar| raises every integrand, so the tail of a finite sequence bounds the limit
        let kind = RecipeKind::AffineDrift { a: c(a, 0.0), b: c(b, 0.0), da: c(0.0, 0.0), db: c(db, 0.0) };
        let seq = generate(&SequenceRecipe::new(kind, 16), disk(1)).unwrap();
        for spec in families() {
            let report = lsc_check(&spec, &seq);
            prop_assert!(report.holds, "{spec:?}: {report:?}");
        }
    }

    #[test]
    fn truncated_hopf_grows_with_n((a, b) in orientation_preserving(), p in 0.2..2.0f64) {
        let d = wirtinger_derivatives(&MappingField::from_fn(disk(1), |z| a * z + b * z.conj()).unwrap());
        let mut previous = vec![0.0; d.len()];
        for n in 0..8 {
            let psi = ahlfors_hopf(&d, p, Truncation::Finite(n), HopfWeight::None).unwrap();
            for (t, v) in psi.values.iter().enumerate() {
                prop_assert!(v.norm() >= previous[t] * (1.0 - 1e-12));
                previous[t] = v.norm();
            }
        }
    }

    #[test]
    fn hopf_vanishes_exactly_on_conformal_elements(a in complex(2.0), p in 0.5..3.0f64) {
        prop_assume!(a.norm() > 0.1);
        let d = wirtinger_derivatives(&MappingField::from_fn(disk(2), |z| a * z + 0.1 * a * z * z).unwrap());
        let phi = hopf_differential(&d, p);
        let psi = ahlfors_hopf(&d, p, Truncation::Infinite, HopfWeight::None).unwrap();
        for t in 0..d.len() {
            let conformal = d.fzbar[t] == c(0.0, 0.0);
            prop_assert_eq!(phi.values[t] == c(0.0, 0.0), conformal);
            prop_assert_eq!(psi.values[t] == c(0.0, 0.0), conformal);
        }
    }

    #[test]
    fn holomorphy_residual_ignores_affine_holomorphic_fields(c0 in complex(5.0), c1 in complex(5.0)) {
        let m = disk(2);
        let base = HopfField::from_fn(m.clone(), |w| w.conj() * w + w * w * w);
        let shifted = HopfField::from_fn(m, |w| w.conj() * w + w * w * w + c0 + c1 * w);
        let (r0, r1) = (holomorphy_residual(&base), holomorphy_residual(&shifted));
        prop_assert!((r0.l1 - r1.l1).abs() <= 1e-9 * (1.0 + r0.l1));
        prop_assert!((r0.l2 - r1.l2).abs() <= 1e-9 * (1.0 + r0.l2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn descent_is_monotone_feasible_and_reproducible(seed in 0u64..1000, perturbation in 0.05..0.3f64, which in 0usize..4) {
        let spec = [FunctionalSpec::lp_mean(2.0), FunctionalSpec::exp_p(1.0), FunctionalSpec::trunc_exp(1.0, 4), FunctionalSpec::dirichlet()][which].clone();
        let cfg = MinimizeConfig { max_iterations: 40, seed, initial_perturbation: perturbation, ..MinimizeConfig::default() };
        let run = || minimize_energy(&spec, disk(2), &BoundaryData::Identity, &cfg).unwrap();
        let (first, second) = (run(), run());
        prop_assert!(first.trace.windows(2).all(|w| w[1].energy < w[0].energy));
        prop_assert!(first.trace.iter().all(|row| row.min_j >= first.jacobian_floor));
        // a stall is only legitimate once the decrease is below the energy's resolution
        let last = first.trace.last().unwrap();
        if first.status == MinimizeStatus::Stalled {
            prop_assert!(last.grad_norm.powi(2) <= 100.0 * f64::EPSILON * last.energy.abs(), "{last:?}");
        }
        let bits = |r: &MinimizeResult| r.trace.iter().map(|row| (row.energy.to_bits(), row.grad_norm.to_bits(), row.step.to_bits())).collect::<Vec<_>>();
        prop_assert_eq!(bits(&first), bits(&second));
        prop_assert_eq!(first.field.values(), second.field.values());
    }

    #[test]
    fn strong_convergence_verdicts_are_self_consistent(da in -0.4..0.4f64, db in -0.1..0.1f64) {
        let kind = RecipeKind::AffineDrift { a: c(1.0, 0.0), b: c(1.0 / 3.0, 0.0), da: c(da, 0.0), db: c(db, 0.0) };
        let recipe = SequenceRecipe { kind, j_max: 64, schedule: IndexSchedule::Dyadic };
        let seq = generate(&recipe, disk(1)).unwrap();
        let params = DiagnoseParams { probe_samples: 2000, ..DiagnoseParams::new(2.0) };
        let report = radon_riesz_diagnose(&FunctionalSpec::lp_mean(2.0), &seq, &params).unwrap();
        if report.verdict == Verdict::StrongConvergence {
            prop_assert!(report.hypotheses.all_ok());
            for s in report.conclusions.series.iter().filter(|s| s.in_scope) {
                prop_assert!(s.ok && s.tail < s.tolerance, "{s:?}");
            }
        }
    }
}
