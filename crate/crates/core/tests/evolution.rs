//! Long-horizon evolution suites: norm conservation, dense-operator oracle
//! equivalence, support growth, and decay regressions.

mod common;

use common::{builtin_coins, random_state, rng};

use num_complex::Complex64;

use coinwalk::evolve::{dense_operator, evolve, return_probability_series, step};
use coinwalk::localization::finite_support_eigenvector_search;
use coinwalk::momentum::{spectrum, MomentumPoint};
use coinwalk::{CoinMatrix, Dimension, LatticeState, Position};

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

/// Largest |psi(x)| over sites strictly outside the union of L1 balls of
/// radius `n` around the initial support.
fn mass_outside_l1_ball(initial: &LatticeState, evolved: &LatticeState, n: u64) -> f64 {
    let sources: Vec<Position> = initial.support().cloned().collect();
    let mut worst = 0.0f64;
    for (pos, vec) in evolved.iter() {
        let inside = sources.iter().any(|s| pos.l1_distance(s) <= n);
        if !inside {
            for z in vec {
                worst = worst.max(z.norm());
            }
        }
    }
    worst
}

#[test]
fn norm_conserved_over_100_steps_d1() {
    let coin = CoinMatrix::hadamard();
    let mut r = rng(11);
    for case in 0..54 {
        let psi = random_state(&mut r, dim(1), 20, 5);
        let out = evolve(&psi, &coin, 100).unwrap();
        let norm = out.norm();
        assert!((norm - 1.0).abs() < 1e-9, "case {case}: norm {norm}");
    }
}

#[test]
fn norm_conserved_over_100_steps_d2() {
    let mut r = rng(22);
    for (i, coin) in [CoinMatrix::fourier(dim(2)), CoinMatrix::grover_2d()]
        .iter()
        .enumerate()
    {
        for case in 0..22 {
            let psi = random_state(&mut r, dim(2), 20, 4);
            let out = evolve(&psi, coin, 100).unwrap();
            let norm = out.norm();
            assert!(
                (norm - 1.0).abs() < 1e-9,
                "coin {i} case {case}: norm {norm}"
            );
        }
    }
}

#[test]
fn norm_conserved_over_100_steps_d3() {
    let coin = CoinMatrix::fourier(dim(3));
    let mut r = rng(33);
    for case in 0..2 {
        let psi = random_state(&mut r, dim(3), 20, 3);
        let out = evolve(&psi, &coin, 100).unwrap();
        let norm = out.norm();
        assert!((norm - 1.0).abs() < 1e-9, "case {case}: norm {norm}");
    }
}

#[test]
fn matrix_free_step_matches_dense_operator_on_50_random_states() {
    let mut r = rng(44);
    let mut checked = 0;
    for da in [1usize, 2] {
        let d = dim(da);
        let coin = if da == 1 {
            CoinMatrix::hadamard()
        } else {
            CoinMatrix::fourier(d)
        };
        for radius in 1..=3usize {
            let op = dense_operator(&coin, radius).unwrap();
            for _ in 0..7 {
                let psi = random_state(&mut r, d, 10, radius as i64);
                let via_op = op.apply(&psi).unwrap();
                let via_step = step(&psi, &coin).unwrap();
                let diff = via_op.max_component_difference(&via_step);
                assert!(diff < 1e-13, "d={da} radius={radius}: diff {diff:.3e}");
                checked += 1;
            }
        }
    }
    // both directions: the dense matrix applied to deltas reproduces step
    let coin = CoinMatrix::grover_2d();
    let op = dense_operator(&coin, 1).unwrap();
    for chi in 0..4usize {
        let mut spin = vec![Complex64::new(0.0, 0.0); 4];
        spin[chi] = Complex64::new(1.0, 0.0);
        for x in [[-1i64, 0], [0, 0], [1, 1]] {
            let psi = LatticeState::delta(dim(2), Position::from(x), &spin).unwrap();
            let via_op = op.apply(&psi).unwrap();
            let via_step = step(&psi, &coin).unwrap();
            assert!(via_op.max_component_difference(&via_step) < 1e-15);
            checked += 1;
        }
    }
    assert!(checked >= 50, "only {checked} oracle comparisons ran");
}

#[test]
fn support_growth_bound_is_exact_for_random_states() {
    let mut r = rng(55);
    for (da, coin) in [
        (1usize, CoinMatrix::hadamard()),
        (2, CoinMatrix::grover_2d()),
        (3, CoinMatrix::fourier(dim(3))),
    ] {
        let psi = random_state(&mut r, dim(da), 6, 2);
        let mut current = psi.clone();
        for n in 1..=8u64 {
            current = step(&current, &coin).unwrap();
            assert_eq!(
                mass_outside_l1_ball(&psi, &current, n),
                0.0,
                "d={da} step {n}"
            );
        }
    }
}

#[test]
fn fourier_2d_decay_regression() {
    // uniform-spin delta at the origin; the window average over n in
    // [100, 200] was frozen from the first run of this diagnostic and is
    // far below the 0.05 decision threshold
    let d = dim(2);
    let coin = CoinMatrix::fourier(d);
    let spin = vec![Complex64::new(0.5, 0.0); 4];
    let psi = LatticeState::delta(d, Position::origin(d), &spin).unwrap();
    let records = return_probability_series(&psi, &coin, &Position::origin(d), 200).unwrap();
    assert_eq!(records.len(), 201);
    let window: Vec<f64> = records[100..=200]
        .iter()
        .map(|r| r.return_probability)
        .collect();
    let avg = window.iter().sum::<f64>() / window.len() as f64;
    assert!(avg < 0.05, "window average {avg}");
    assert!(
        (avg - 1.057657114622e-3).abs() < 1e-11,
        "window average {avg:e} drifted from the frozen regression value"
    );
    for r in &records {
        assert!((r.norm - 1.0).abs() < 1e-10);
    }
}

#[test]
fn evolution_records_norm_within_1e10_for_all_builtin_coins() {
    let mut r = rng(66);
    for (name, coin) in builtin_coins() {
        let psi = random_state(&mut r, coin.d(), 4, 2);
        let records =
            return_probability_series(&psi, &coin, &Position::origin(coin.d()), 30).unwrap();
        for rec in &records {
            assert!(
                (rec.norm - 1.0).abs() < 1e-10,
                "{name} step {}: norm {}",
                rec.step_index,
                rec.norm
            );
            assert!(rec.return_probability <= rec.norm * rec.norm + 1e-15);
        }
    }
}

/// Coins with a full-rank submatrix cannot have finite-support eigenvectors;
/// the truncated search must agree.
#[test]
fn full_rank_coins_have_empty_searches_d1_d2() {
    for da in [1usize, 2] {
        let d = dim(da);
        let coin = CoinMatrix::fourier(d);
        let candidates = spectrum(&coin, &MomentumPoint::zero(d)).unwrap();
        let mut deduped: Vec<Complex64> = Vec::new();
        for z in candidates {
            if deduped.iter().all(|w| (w - z).norm() > 1e-8) {
                deduped.push(z);
            }
        }
        for lambda in deduped {
            for radius in 0..=3usize {
                let result = finite_support_eigenvector_search(&coin, lambda, radius).unwrap();
                assert_eq!(
                    result.nullspace_dimension, 0,
                    "d={da} lambda={lambda} radius={radius}"
                );
            }
        }
    }
}

/// The d = 3 sweep at radii 0..=2; radius 3 lives in the ignored test below.
#[test]
fn full_rank_coins_have_empty_searches_d3() {
    let d = dim(3);
    let coin = CoinMatrix::fourier(d);
    let candidates = spectrum(&coin, &MomentumPoint::zero(d)).unwrap();
    let mut deduped: Vec<Complex64> = Vec::new();
    for z in candidates {
        if deduped.iter().all(|w| (w - z).norm() > 1e-8) {
            deduped.push(z);
        }
    }
    for lambda in deduped {
        for radius in 0..=2usize {
            let result = finite_support_eigenvector_search(&coin, lambda, radius).unwrap();
            assert_eq!(
                result.nullspace_dimension, 0,
                "lambda={lambda} radius={radius}"
            );
        }
    }
}

/// Full-fidelity d = 3 sweep including radius 3. The radius-3 singular value
/// decompositions take minutes, so this runs only on request:
/// `cargo test -p coinwalk --test evolution -- --ignored`.
#[test]
#[ignore]
fn full_rank_coins_have_empty_searches_d3_radius_3() {
    let d = dim(3);
    let coin = CoinMatrix::fourier(d);
    let candidates = spectrum(&coin, &MomentumPoint::zero(d)).unwrap();
    let mut deduped: Vec<Complex64> = Vec::new();
    for z in candidates {
        if deduped.iter().all(|w| (w - z).norm() > 1e-8) {
            deduped.push(z);
        }
    }
    for lambda in deduped {
        let result = finite_support_eigenvector_search(&coin, lambda, 3).unwrap();
        assert_eq!(result.nullspace_dimension, 0, "lambda={lambda} radius=3");
    }
}
