use std::f64::consts::PI;

use proptest::prelude::*;
use qdcert_core::linalg;
use qdcert_core::{
    averaged_gram, build_grid, build_kernel, evaluation_map, fejer_kernel, haar_quadrature, induced_representation,
    isometry_distortion, orbit_closure, pullback, Band, BandFunction, CompactGroupModel, Complex64, GridProfile,
    GroupElement, IsometricAction, KernelChoice, Point, RotationAngle, SpaceFunction, Strategy as Factorization, UcpMap,
};

fn torus() -> CompactGroupModel {
    CompactGroupModel::torus(1).unwrap()
}

fn band_function(degree: usize) -> impl Strategy<Value = BandFunction> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * degree + 1).prop_map(move |c| {
        BandFunction::from_data(Band::torus(1, degree), c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_commutes_with_translation(f in band_function(4), k in band_function(3), a in 0.0f64..6.3) {
        let t = torus();
        let gamma = GroupElement::angle(a);
        let lhs = t.translate(&gamma, &t.convolve(&f, &k));
        let rhs = t.convolve(&t.translate(&gamma, &f), &k);
        prop_assert!(lhs.sub(&rhs).sup_norm() < 1e-12);
    }

    #[test]
    fn translation_is_multiplicative(f in band_function(3), g in band_function(2), a in 0.0f64..6.3) {
        let t = torus();
        let gamma = GroupElement::angle(a);
        let lhs = t.translate(&gamma, &f.mul(&g));
        let rhs = t.translate(&gamma, &f).mul(&t.translate(&gamma, &g));
        prop_assert!(lhs.sub(&rhs).sup_norm() < 1e-12);
    }

    #[test]
    fn fejer_kernels_are_nonnegative(n in 1usize..40, theta in 0.0f64..6.3) {
        let k = fejer_kernel(&torus(), n).unwrap();
        let v = k.k.evaluate(&GroupElement::angle(theta));
        prop_assert!(v.re >= -1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn built_kernels_satisfy_the_square_root_estimate(radius in 1.0f64..PI, band in 4usize..16) {
        let k = build_kernel(&torus(), radius, band, 0.99).unwrap();
        let qdcert_core::KernelOrigin::Built { trace, .. } = &k.origin else { unreachable!() };
        prop_assert!(trace.product_gap <= trace.product_gap_bound());
        let (lo, hi) = trace.scale_interval();
        prop_assert!(lo <= trace.normalization_scale && trace.normalization_scale <= hi);
        prop_assert!(k.checks(16).lattice_min >= -1e-9);
    }

    #[test]
    fn grid_weights_form_a_partition(size in 1usize..64, seed in 0u64..1000, amp in 0.0f64..0.25) {
        let g = build_grid(&torus(), size, GridProfile::Perturbed { seed, amplitude: amp }).unwrap();
        prop_assert!(g.weights.iter().all(|&w| w > 0.0));
        prop_assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn induced_representation_is_a_homomorphism(seed in 0u64..500, a in 0.0f64..6.3, b in 0.0f64..6.3) {
        let t = torus();
        let grid = build_grid(&t, 12, GridProfile::Perturbed { seed, amplitude: 0.2 }).unwrap();
        let em = evaluation_map(Band::torus(1, 2), &grid).unwrap();
        let pa = induced_representation(&t, &em, &GroupElement::angle(a)).matrix;
        let pb = induced_representation(&t, &em, &GroupElement::angle(b)).matrix;
        let pab = induced_representation(&t, &em, &GroupElement::angle(a + b)).matrix;
        prop_assert!(linalg::max_abs_diff(&(pa * pb), &pab) < 1e-10);
    }

    #[test]
    fn averaged_gram_is_close_to_identity(seed in 0u64..500, amp in 0.0f64..0.25) {
        let t = torus();
        let grid = build_grid(&t, 24, GridProfile::Perturbed { seed, amplitude: amp }).unwrap();
        let em = evaluation_map(Band::torus(1, 3), &grid).unwrap();
        let gram = averaged_gram(&t, &em, &haar_quadrature(&t, 13).unwrap()).unwrap();
        prop_assert!(linalg::max_abs_diff(&gram.s, &gram.s.adjoint()) < 1e-12);
        prop_assert!(linalg::min_eigenvalue(&gram.s) > 0.0);
        prop_assert!(gram.deviation <= 2.0 * isometry_distortion(&em) + 1e-8);
    }

    #[test]
    fn pullback_is_a_unital_star_homomorphism(f in band_function(2), g in band_function(3), x in 0.0f64..6.3, q in 2u64..9) {
        let dense = IsometricAction::rotation(1, vec![vec![RotationAngle::Radians(1.0)]], true).unwrap();
        let finite = IsometricAction::rotation(1, vec![vec![RotationAngle::Turns { num: 1, den: q }]], false).unwrap();
        for action in [dense, finite] {
            let ocm = orbit_closure(&action, Point::Torus([x, 0.0])).unwrap();
            let (sf, sg) = (SpaceFunction::Torus(f.clone()), SpaceFunction::Torus(g.clone()));
            let lhs = pullback(&ocm, &sf.mul(&sg)).unwrap();
            let rhs = pullback(&ocm, &sf).unwrap().mul(&pullback(&ocm, &sg).unwrap());
            let quad = haar_quadrature(&ocm.group, 16).unwrap();
            for node in &quad.nodes {
                prop_assert!((lhs.evaluate(node) - rhs.evaluate(node)).norm() < 1e-12);
            }
            let conj = pullback(&ocm, &sf.conj()).unwrap();
            let base = pullback(&ocm, &sf).unwrap();
            for node in &quad.nodes {
                prop_assert!((conj.evaluate(node) - base.evaluate(node).conj()).norm() < 1e-12);
            }
            let one = pullback(&ocm, &SpaceFunction::Torus(BandFunction::constant(Band::torus(1, 0), linalg::c(1.0)))).unwrap();
            prop_assert!((one.evaluate(&quad.nodes[0]) - 1.0).norm() < 1e-12);
            prop_assert!(ocm.equivariance_defect(&action).unwrap() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn band_probes_stay_positive(p in band_function(3), seed in 0u64..50) {
        let t = torus();
        let k = KernelChoice::Fejer { degree: 4 }.resolve(&t).unwrap();
        let grid = build_grid(&t, 16, GridProfile::Perturbed { seed, amplitude: 0.2 }).unwrap();
        let map = UcpMap::new(&t, k, &grid, Factorization::Cholesky).unwrap();
        prop_assert!(map.positivity_probe(&[p]) >= -1e-9);
    }
}
