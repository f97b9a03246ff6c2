//! Property suites for the state algebra, the evolution stencil, and the
//! momentum-space operators.

mod common;

use common::{builtin_coins, random_coin, random_state, rng};

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use coinwalk::evolve::step;
use coinwalk::localization::{coin_submatrix, numerical_rank, singular_values_desc, RANK_TOL};
use coinwalk::momentum::{momentum_operator, spectrum, MomentumPoint};
use coinwalk::{CoinMatrix, Dimension, LatticeState, SubmatrixSelector};

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn unit_disc_complex() -> impl Strategy<Value = Complex64> {
    // nonzero, bounded away from the origin so relative rank thresholds stay
    // meaningful
    (0.3f64..1.0, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(r, theta)| Complex64::from_polar(r, theta))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_is_linear(seed in 0u64..1_000_000, da in 1usize..=2,
                      alpha in unit_disc_complex(), beta in unit_disc_complex()) {
        let d = dim(da);
        let coin = if da == 2 { CoinMatrix::grover_2d() } else { CoinMatrix::hadamard() };
        let mut r = rng(seed);
        let psi = random_state(&mut r, d, 6, 3);
        let phi = random_state(&mut r, d, 6, 3);
        let combo = LatticeState::linear_combination(&[(alpha, &psi), (beta, &phi)]).unwrap();
        let left = step(&combo, &coin).unwrap();
        let right = LatticeState::linear_combination(&[
            (alpha, &step(&psi, &coin).unwrap()),
            (beta, &step(&phi, &coin).unwrap()),
        ]).unwrap();
        prop_assert!(left.max_component_difference(&right) < 1e-13);
    }

    #[test]
    fn explicit_zero_sites_do_not_change_evolution(seed in 0u64..1_000_000) {
        let d = dim(2);
        let coin = CoinMatrix::fourier(d);
        let mut r = rng(seed);
        let psi = random_state(&mut r, d, 5, 2);
        let mut padded_entries: Vec<_> = psi
            .iter()
            .map(|(p, v)| (p.clone(), v.to_vec()))
            .collect();
        padded_entries.push((
            coinwalk::Position::from([9, -9]),
            vec![Complex64::new(0.0, 0.0); 4],
        ));
        let padded = LatticeState::from_entries(d, padded_entries).unwrap();
        prop_assert_eq!(&psi, &padded);
        let a = step(&psi, &coin).unwrap();
        let b = step(&padded, &coin).unwrap();
        prop_assert_eq!(a.norm().to_bits(), b.norm().to_bits());
        prop_assert!(a == b || a.max_component_difference(&b) == 0.0);
    }

    #[test]
    fn momentum_operator_is_unitary_for_builtin_coins(
        k1 in 0.0f64..std::f64::consts::TAU,
        k2 in 0.0f64..std::f64::consts::TAU,
        k3 in 0.0f64..std::f64::consts::TAU,
    ) {
        for (_, coin) in builtin_coins() {
            let k = MomentumPoint::new(&[k1, k2, k3][..coin.d().get()]);
            let op = momentum_operator(&coin, &k).unwrap();
            let dev = coinwalk::coin::unitarity_deviation(op.matrix());
            prop_assert!(dev < 1e-12, "coin d={} dev={dev:.3e}", coin.d());
        }
    }

    #[test]
    fn momentum_determinant_matches_coin_determinant(
        k1 in 0.0f64..std::f64::consts::TAU,
        k2 in 0.0f64..std::f64::consts::TAU,
        k3 in 0.0f64..std::f64::consts::TAU,
    ) {
        // the diagonal phases cancel pairwise, so det U(k) = det C
        for (_, coin) in builtin_coins() {
            let k = MomentumPoint::new(&[k1, k2, k3][..coin.d().get()]);
            let op = momentum_operator(&coin, &k).unwrap();
            let det_op = op.matrix().determinant();
            let det_coin = coin.matrix().determinant();
            prop_assert!((det_op - det_coin).norm() < 1e-10);
        }
    }

    #[test]
    fn grover_keeps_eigenvalue_one_at_every_k(
        k1 in 0.0f64..std::f64::consts::TAU,
        k2 in 0.0f64..std::f64::consts::TAU,
    ) {
        let coin = CoinMatrix::grover_2d();
        let eigs = spectrum(&coin, &MomentumPoint::new(&[k1, k2])).unwrap();
        let dist = eigs
            .iter()
            .map(|z| (z - Complex64::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        prop_assert!(dist < 1e-10, "distance {dist:.3e}");
        for z in &eigs {
            prop_assert!((z.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn short_evolution_conserves_norm(seed in 0u64..1_000_000, da in 1usize..=2) {
        let d = dim(da);
        let coin = if da == 2 { CoinMatrix::fourier(d) } else { CoinMatrix::hadamard() };
        let mut r = rng(seed);
        let psi = random_state(&mut r, d, 8, 3);
        let evolved = coinwalk::evolve::evolve(&psi, &coin, 10).unwrap();
        prop_assert!((evolved.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_files_round_trip_bit_exactly(seed in 0u64..1_000_000, da in 1usize..=3) {
        let d = dim(da);
        let mut r = rng(seed);
        let psi = random_state(&mut r, d, 10, 4);
        let back = LatticeState::from_json_str(&psi.to_json_string()).unwrap();
        prop_assert!(back == psi);
        for ((pa, va), (pb, vb)) in psi.iter().zip(back.iter()) {
            prop_assert_eq!(pa, pb);
            for (a, b) in va.iter().zip(vb) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn submatrix_entries_are_bit_identical(seed in 0u64..1_000_000, da in 1usize..=4) {
        let d = dim(da);
        let mut r = rng(seed);
        let coin = random_coin(&mut r, d);
        let bits: Vec<u8> = (0..da).map(|_| r.random_range(0..=1u8)).collect();
        let selector = SubmatrixSelector::new(&bits).unwrap();
        let sub = coin_submatrix(&coin, &selector).unwrap();
        let indices = selector.indices();
        for j in 0..da {
            for k in 0..da {
                prop_assert_eq!(sub.matrix[(j, k)], coin.entry(indices[j], indices[k]));
            }
        }
        prop_assert!(sub.rank <= da);
    }

    #[test]
    fn rank_is_invariant_under_scaling(seed in 0u64..1_000_000, da in 1usize..=4,
                                       alpha in unit_disc_complex()) {
        let d = dim(da);
        let mut r = rng(seed);
        let coin = random_coin(&mut r, d);
        let bits: Vec<u8> = (0..da).map(|_| r.random_range(0..=1u8)).collect();
        let sub = coin_submatrix(&coin, &SubmatrixSelector::new(&bits).unwrap()).unwrap();
        let scaled: DMatrix<Complex64> = sub.matrix.map(|z| z * alpha);
        let svs = singular_values_desc(&scaled);
        prop_assert_eq!(numerical_rank(&svs, RANK_TOL), sub.rank);
    }
}
