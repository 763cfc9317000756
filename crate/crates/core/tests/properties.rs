//! Randomized invariants over seeds and shapes.

use proptest::prelude::*;

use lueders::generate::{generate_commuting_resolution, generate_noncommuting_resolution};
use lueders::linalg::{hermitian_eigendecompose, operator_norm, sqrt_psd};
use lueders::lueders::superoperator_consistency;
use lueders::rng::SeededRng;
use lueders::witness::{contraction_bound, positive_bound_threshold, witness_search};
use lueders::{ComplexMatrix, Error, LuedersOperation};

fn random_hermitian(d: usize, seed: u64) -> ComplexMatrix {
    let g = SeededRng::new(seed).gaussian_matrix(d, d);
    (&g + &g.adjoint()).scale_real(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn windows_partition_the_identity(d in 1usize..7, n in 1usize..4, m in 1u64..12, seed in any::<u64>()) {
        let set = generate_commuting_resolution(d, n, seed).unwrap();
        for e in set.effects() {
            let bins = e.occupied_bins(m);
            let mut total = ComplexMatrix::zeros(d, d);
            for (_, p) in &bins {
                total = &total + p;
            }
            prop_assert!((&total - &ComplexMatrix::identity(d)).frobenius_norm() <= 1e-10);
            // distinct bins are orthogonal
            for (i, (_, p)) in bins.iter().enumerate() {
                for (_, q) in &bins[i + 1..] {
                    prop_assert!((p * q).frobenius_norm() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn bound_grows_with_refinement(n in 1u64..20, m in 1u64..20, p in 1u64..5000) {
        prop_assert!(contraction_bound(n, m, p + 1) > contraction_bound(n, m, p));
        prop_assert!(contraction_bound(n, m, p) < 1.0 / (2.0 * (m * m) as f64));
        let star = positive_bound_threshold(n, m);
        prop_assert!(contraction_bound(n, m, star) > 0.0);
        prop_assert!(star == 1 || contraction_bound(n, m, star - 1) <= 0.0);
    }

    #[test]
    fn psd_root_squares_back(d in 1usize..7, seed in any::<u64>()) {
        let g = SeededRng::new(seed).gaussian_matrix(d, d);
        let a = (&g.adjoint() * &g).hermitian_part();
        let r = sqrt_psd(&a).unwrap();
        prop_assert!(r.hermitian_defect() <= 1e-12 * r.frobenius_norm().max(1.0));
        prop_assert!((&(&r * &r) - &a).frobenius_norm() <= 1e-9 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn eigenprojector_traces_count_members(d in 1usize..9, seed in any::<u64>()) {
        let eig = hermitian_eigendecompose(&random_hermitian(d, seed)).unwrap();
        for c in eig.clusters(1e-9) {
            let p = eig.projector(c.members.clone());
            prop_assert!((p.trace().re - c.members.len() as f64).abs() <= 1e-10);
            prop_assert!((&(&p * &p) - &p).frobenius_norm() <= 1e-10);
        }
    }

    #[test]
    fn operation_preserves_order_and_vectorizes(d in 2usize..5, n in 3usize..5, seed in any::<u64>()) {
        let set = generate_noncommuting_resolution(d, n, seed).unwrap();
        let op = LuedersOperation::new(set);
        prop_assert!(superoperator_consistency(&op) <= 1e-12);
        // Φ is positive and unital on a resolution: 0 ≤ B ≤ I maps into the same range
        let g = SeededRng::new(seed ^ 1).gaussian_matrix(d, d);
        let b = (&g * &g.adjoint()).hermitian_part();
        let b = b.scale_real(1.0 / operator_norm(&b));
        let image = hermitian_eigendecompose(&op.apply(&b).unwrap().hermitian_part()).unwrap();
        prop_assert!(image.eigenvalues[0] >= -1e-12);
        prop_assert!(*image.eigenvalues.last().unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn functions_of_an_effect_never_get_a_witness(d in 1usize..7, seed in any::<u64>()) {
        let set = generate_commuting_resolution(d, 2, seed).unwrap();
        let e = &set.effects()[0];
        // a function of E commutes with E
        let b = e.eigensystem().map_spectrum(|x| (3.0 * x).sin());
        prop_assert!(matches!(witness_search(e, &b, 1e-9), Err(Error::CommutesNoWitness)));
    }
}
