#![allow(dead_code)]

use mibn_core::{ComplexMatrix, DensityOp, LindbladModel, RealMatrix};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

pub fn random_complex<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let a = random_complex(rng, dim, dim);
    (&a + a.adjoint()).unscale(2.0)
}

/// Random Hamiltonian plus one to three random dissipators.
pub fn random_model<R: Rng>(rng: &mut R, dim: usize) -> LindbladModel {
    let h = random_hermitian(rng, dim);
    let count = rng.random_range(1..=3);
    let v = (0..count).map(|_| random_complex(rng, dim, dim).unscale(2.0)).collect();
    LindbladModel::new(h, v).unwrap()
}

/// Mixture of three random pure states.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityOp {
    let mut rho = ComplexMatrix::zeros(dim, dim);
    let weights: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let v = random_complex(rng, dim, 1);
        let v = v.unscale(v.norm());
        rho += (&v * v.adjoint()).scale(w / total);
    }
    mibn_core::validate_density(rho).unwrap()
}

/// Column-stacked Lindblad superoperator:
/// `-i(I⊗H - Hᵀ⊗I) + Σ (V̄⊗V - ½ I⊗V†V - ½ (V†V)ᵀ⊗I)`.
pub fn liouvillian(model: &LindbladModel) -> ComplexMatrix {
    let n = model.dim();
    let id = ComplexMatrix::identity(n, n);
    let h = model.hamiltonian();
    let i = Complex64::new(0.0, 1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * -i;
    for v in model.dissipators() {
        let vv = v.adjoint() * v;
        l += v.conjugate().kronecker(v);
        l -= id.kronecker(&vv).unscale(2.0);
        l -= vv.transpose().kronecker(&id).unscale(2.0);
    }
    l
}

/// `ρ(τ)` from the complex superoperator, exponentiated by nalgebra.
pub fn evolve_direct(model: &LindbladModel, rho: &ComplexMatrix, tau: f64) -> ComplexMatrix {
    let n = model.dim();
    let prop = (liouvillian(model) * Complex64::new(tau, 0.0)).exp();
    let v = prop * DVector::from_column_slice(rho.as_slice());
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &RealMatrix) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
