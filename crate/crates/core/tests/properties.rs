use proptest::prelude::*;

use cmkz::calogero_moser::l0_residual;
use cmkz::harness::{generic_target, match_points};
use cmkz::partitions::{enumerate_partitions, Partition};
use cmkz::sampling;
use cmkz::tensor_gaudin::{spectral_points, JointEigenOptions};
use cmkz::wronski::{psi, wronski_fiber, wronski_map, FiberOptions, PolyTuple};
use cmkz::C64;

fn partitions_up_to(n: usize) -> Vec<Partition> {
    (2..=n).flat_map(|k| enumerate_partitions(k, k)).collect()
}

fn spectrum(lambda: &Partition, z: &[C64]) -> Vec<Vec<C64>> {
    spectral_points(lambda, z, lambda.length(), &JointEigenOptions::default(), 0)
        .unwrap()
        .into_iter()
        .map(|s| s.p)
        .collect()
}

fn conjugate(lambda: &Partition) -> Partition {
    let parts = lambda.nonzero_parts();
    let cols = (1..=parts[0])
        .map(|j| parts.iter().filter(|&&p| p >= j).count())
        .collect();
    Partition::new(cols).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectra_are_translation_and_scale_covariant(seed in 0u64..1000, k in 0usize..9) {
        let lambdas = partitions_up_to(4);
        let lambda = &lambdas[k % lambdas.len()];
        let mut rng = sampling::rng(seed);
        let z = sampling::generic_positions(lambda.weight(), &mut rng);
        let shift = sampling::complex_in_disc(&mut rng, 3.0);
        let s = C64::new(0.5, 0.0) + sampling::complex_in_disc(&mut rng, 0.4);
        let base = spectrum(lambda, &z);

        let moved: Vec<C64> = z.iter().map(|x| x + shift).collect();
        prop_assert!(match_points(&base, &spectrum(lambda, &moved), 1e-8).is_perfect());

        let scaled: Vec<C64> = z.iter().map(|x| x * s).collect();
        let rescaled: Vec<Vec<C64>> = spectrum(lambda, &scaled)
            .into_iter()
            .map(|p| p.into_iter().map(|x| x * s).collect())
            .collect();
        prop_assert!(match_points(&base, &rescaled, 1e-8).is_perfect());
    }

    #[test]
    fn conjugate_partitions_have_opposite_spectra(seed in 0u64..1000, k in 0usize..9) {
        let lambdas = partitions_up_to(4);
        let lambda = &lambdas[k % lambdas.len()];
        let z = sampling::generic_positions(lambda.weight(), &mut sampling::rng(seed));
        let negated: Vec<Vec<C64>> = spectrum(&conjugate(lambda), &z)
            .into_iter()
            .map(|p| p.into_iter().map(|x| -x).collect())
            .collect();
        prop_assert!(match_points(&spectrum(lambda, &z), &negated, 1e-8).is_perfect());
    }

    #[test]
    fn psi_lands_in_the_spectrum(seed in 0u64..1000, k in 0usize..9) {
        let lambdas = partitions_up_to(4);
        let lambda = &lambdas[k % lambdas.len()];
        let x = PolyTuple::random(lambda, 1.0, &mut sampling::rng(seed));
        let point = psi(&x).unwrap();
        prop_assert!(l0_residual(&point.z, &point.p).unwrap() <= 1e-8);
        prop_assert!(match_points(&[point.p.clone()], &spectrum(lambda, &point.z), 1e-6).unmatched_a.is_empty());
    }

    #[test]
    fn fiber_solutions_map_back_to_the_target(seed in 0u64..1000, k in 0usize..4) {
        let lambda = Partition::new([vec![2], vec![2, 1], vec![2, 2], vec![3, 1]][k].clone()).unwrap();
        let sigma = generic_target(lambda.weight(), seed);
        let sol = wronski_fiber(&lambda, &sigma, &FiberOptions::default(), seed).unwrap();
        prop_assert_eq!(sol.solutions.len(), lambda.irrep_dimension() as usize);
        for x in &sol.solutions {
            let w = wronski_map(x).unwrap().w;
            let err = w.iter().zip(&sigma).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-9 * sigma.iter().map(|s| s.norm()).fold(1.0, f64::max));
        }
    }
}

#[test]
fn spectra_of_three_sites_partition_the_weight_space() {
    let z = sampling::generic_positions(3, &mut sampling::rng(9));
    let total: usize = enumerate_partitions(3, 3)
        .iter()
        .map(|l| spectrum(l, &z).len() * l.irrep_dimension() as usize)
        .sum();
    assert_eq!(total, 6);
}
