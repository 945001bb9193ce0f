//! Seeded instance generators. All randomness goes through a caller-supplied
//! `rand::Rng`, so a ChaCha stream seeded from a `u64` reproduces instances
//! bit for bit on every platform.

use rand::Rng;

use crate::contraction::{tensor_tuple, ContractionTuple};
use crate::error::Result;
use crate::linops::{c64, op_norm, ComplexMatrix, ComplexVector, C64};

/// Entries with real and imaginary parts uniform on [-1, 1].
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
    })
}

/// Random matrix rescaled to operator norm exactly `norm`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, dim: usize, norm: f64) -> ComplexMatrix {
    loop {
        let a = random_matrix(rng, dim, dim);
        let n = op_norm(&a);
        if n > 1e-8 {
            return a * c64(norm / n, 0.0);
        }
    }
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| {
            c64(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
        });
        let n = v.norm();
        if n > 1e-8 {
            return v / c64(n, 0.0);
        }
    }
}

/// Uniform point of the closed disk of radius `radius`.
pub fn random_disk_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random_range(0.0f64..=1.0).sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(r, t)
}

/// Parameters for [`random_tensor_tuple`].
#[derive(Debug, Clone, Copy)]
pub struct TensorShape {
    pub max_factors: usize,
    pub max_dim: usize,
    pub min_norm: f64,
    pub max_norm: f64,
}

/// Doubly commuting tuple `I ⊗ .. ⊗ A_i ⊗ .. ⊗ I` with random factor count,
/// factor dimensions and factor norms inside `shape`.
pub fn random_tensor_tuple<R: Rng + ?Sized>(
    rng: &mut R,
    shape: TensorShape,
) -> Result<ContractionTuple> {
    let count = rng.random_range(1..=shape.max_factors.max(1));
    let factors: Vec<ComplexMatrix> = (0..count)
        .map(|_| {
            let dim = rng.random_range(1..=shape.max_dim.max(1));
            let norm = rng.random_range(shape.min_norm..=shape.max_norm);
            random_contraction(rng, dim, norm)
        })
        .collect();
    tensor_tuple(&factors)
}
