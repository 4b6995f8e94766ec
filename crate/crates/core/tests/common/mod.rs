//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wll::filterbank::SparseSeq;
use wll::linalg::{ComplexMatrix, C64};
use wll::loopgroup::build_loop;
use wll::MatrixLoop;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cplx(r: &mut impl Rng) -> C64 {
    C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| cplx(r))
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(r, n, n).qr().q()
}

/// Orthogonal projection onto the span of `rank` random vectors.
pub fn random_projection(r: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let q = random_matrix(r, n, rank).qr().q();
    &q * q.adjoint()
}

/// V Π (I − P_j + z P_j) with random unitary V and rank-one P_j.
pub fn random_loop(r: &mut impl Rng, n: usize, g: usize) -> MatrixLoop {
    let v = random_unitary(r, n);
    let factors: Vec<_> = (1..g).map(|_| (random_projection(r, n, 1), 1)).collect();
    build_loop(&v, &factors).expect("random loop")
}

pub fn random_sparse(r: &mut impl Rng, len: usize, spread: i64) -> SparseSeq {
    (0..len)
        .map(|_| (r.random_range(-spread..=spread), cplx(r)))
        .collect()
}

pub fn coeff_diff(a: &MatrixLoop, b: &MatrixLoop) -> f64 {
    let len = a.coeffs().len().max(b.coeffs().len());
    (0..len)
        .map(|k| (a.coeff(k) - b.coeff(k)).iter().map(|x| x.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}
