//! Helpers shared by the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use coinwalk::{CoinMatrix, Dimension, LatticeState, Position};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// A normalized state with at most `max_sites` distinct sites inside the
/// L-infinity box of radius `box_radius`.
pub fn random_state(
    rng: &mut StdRng,
    d: Dimension,
    max_sites: usize,
    box_radius: i64,
) -> LatticeState {
    let m = d.internal_dim();
    let sites = rng.random_range(1..=max_sites);
    let mut entries: Vec<(Position, Vec<Complex64>)> = Vec::new();
    for _ in 0..sites {
        let coords: Vec<i64> = (0..d.get())
            .map(|_| rng.random_range(-box_radius..=box_radius))
            .collect();
        let pos = Position::new(&coords);
        if entries.iter().any(|(p, _)| *p == pos) {
            continue;
        }
        let vec: Vec<Complex64> = (0..m).map(|_| random_complex(rng)).collect();
        entries.push((pos, vec));
    }
    let state = LatticeState::from_entries(d, entries).expect("valid random entries");
    match state.normalized() {
        Ok(s) => s,
        // astronomically unlikely all-zero draw; fall back to a delta
        Err(_) => {
            let mut spin = vec![Complex64::new(0.0, 0.0); m];
            spin[0] = Complex64::new(1.0, 0.0);
            LatticeState::delta(d, Position::origin(d), &spin).expect("delta")
        }
    }
}

/// A Haar-ish random unitary coin from the QR factorization of a random
/// complex matrix.
pub fn random_coin(rng: &mut StdRng, d: Dimension) -> CoinMatrix {
    let n = d.internal_dim();
    let raw = DMatrix::from_fn(n, n, |_, _| random_complex(rng));
    let q = raw.qr().q();
    CoinMatrix::new(d, q).expect("QR factor is unitary")
}

pub fn builtin_coins() -> Vec<(&'static str, CoinMatrix)> {
    vec![
        ("hadamard", CoinMatrix::hadamard()),
        ("fourier:2", CoinMatrix::builtin("fourier:2").unwrap()),
        ("fourier:3", CoinMatrix::builtin("fourier:3").unwrap()),
        ("grover2d", CoinMatrix::grover_2d()),
    ]
}
