use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::{trace_sandwich, trace_triple, CoordinateVector, HermitianBasis};
use super::expm::matrix_exp;
use super::LindbladModel;
use crate::error::{Error, Result};
use crate::hilbert::{ComplexMatrix, RealMatrix};

/// Largest imaginary residue tolerated in a generator entry.
pub const GENERATOR_IMAG_TOL: f64 = 1e-10;

/// The real matrix `W` of the realified master equation, together with the
/// Hamiltonian part `L` and each dissipator part `D^(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGenerator {
    dim: usize,
    identity_slot: usize,
    w: RealMatrix,
    hamiltonian_part: RealMatrix,
    dissipator_parts: Vec<RealMatrix>,
}

impl RealGenerator {
    /// Wraps an externally computed generator. The identity row must vanish.
    pub fn from_matrix(dim: usize, identity_slot: usize, w: RealMatrix) -> Result<Self> {
        let g = Self {
            dim,
            identity_slot,
            hamiltonian_part: RealMatrix::zeros(w.nrows(), w.ncols()),
            dissipator_parts: Vec::new(),
            w,
        };
        g.check()?;
        Ok(g)
    }

    /// Generator of the trivial dynamics.
    pub fn zero(basis: &HermitianBasis) -> Self {
        let k = basis.len();
        Self {
            dim: basis.dim(),
            identity_slot: basis.identity_slot(),
            w: RealMatrix::zeros(k, k),
            hamiltonian_part: RealMatrix::zeros(k, k),
            dissipator_parts: Vec::new(),
        }
    }

    fn check(&self) -> Result<()> {
        let k = self.dim * self.dim;
        if self.w.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}x{}, expected {k}x{k}",
                self.w.nrows(),
                self.w.ncols()
            )));
        }
        if self.identity_slot >= k {
            return Err(Error::IndexOutOfRange { index: self.identity_slot + 1, max: k });
        }
        if self.w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = self.identity_row_residual();
        let tol = 1e-10 * self.w.abs().max().max(1.0);
        if residual > tol {
            return Err(Error::InvalidBasis(format!(
                "identity row of the generator is not zero (residual {residual:e})"
            )));
        }
        Ok(())
    }

    /// Hilbert-space dimension `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn identity_slot(&self) -> usize {
        self.identity_slot
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.w
    }

    pub fn hamiltonian_part(&self) -> &RealMatrix {
        &self.hamiltonian_part
    }

    pub fn dissipator_parts(&self) -> &[RealMatrix] {
        &self.dissipator_parts
    }

    /// Max-norm of the identity row; zero for trace-preserving dynamics.
    pub fn identity_row_residual(&self) -> f64 {
        self.w.row(self.identity_slot).iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// `e^{W τ}`.
    pub fn propagator(&self, tau: f64) -> Result<RealMatrix> {
        if !(tau >= 0.0) {
            return Err(Error::NegativeDuration(tau));
        }
        if tau == 0.0 {
            let k = self.w.nrows();
            return Ok(RealMatrix::identity(k, k));
        }
        matrix_exp(&(&self.w * tau))
    }
}

/// Realifies `model` in `basis`:
/// `L_mn = tr(i H [σ_m, σ_n])` and
/// `D_mn = tr(V^† σ_m V σ_n) - ½ tr(V^† V {σ_m, σ_n})`.
pub fn build_generator(model: &LindbladModel, basis: &HermitianBasis) -> Result<RealGenerator> {
    if model.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "model dimension {}, basis dimension {}",
            model.dim(),
            basis.dim()
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let hamiltonian = model.hamiltonian();
    let hamiltonian_part = if hamiltonian.iter().all(|z| z.norm() == 0.0) {
        RealMatrix::zeros(basis.len(), basis.len())
    } else {
        realify(basis, |a, b| {
            i * (trace_triple(hamiltonian, a, b) - trace_triple(hamiltonian, b, a))
        })?
    };

    let mut dissipator_parts = Vec::with_capacity(model.dissipators().len());
    for v in model.dissipators() {
        let k: ComplexMatrix = v.adjoint() * v;
        let part = realify(basis, |a, b| {
            trace_sandwich(v, a, b) - (trace_triple(&k, a, b) + trace_triple(&k, b, a)) * 0.5
        })?;
        dissipator_parts.push(part);
    }

    let mut w = hamiltonian_part.clone();
    for d in &dissipator_parts {
        w += d;
    }
    let generator = RealGenerator {
        dim: basis.dim(),
        identity_slot: basis.identity_slot(),
        w,
        hamiltonian_part,
        dissipator_parts,
    };
    generator.check()?;
    Ok(generator)
}

fn realify<F>(basis: &HermitianBasis, entry: F) -> Result<RealMatrix>
where
    F: Fn(&super::basis::SparseEntries, &super::basis::SparseEntries) -> Complex64 + Sync,
{
    let k = basis.len();
    let rows: Vec<Result<Vec<f64>>> = (0..k)
        .into_par_iter()
        .map(|m| {
            let sm = basis.sparse(m);
            (0..k)
                .map(|n| {
                    let z = entry(sm, basis.sparse(n));
                    if z.im.abs() > GENERATOR_IMAG_TOL {
                        Err(Error::ImaginaryResidue { residue: z.im.abs(), tolerance: GENERATOR_IMAG_TOL })
                    } else {
                        Ok(z.re)
                    }
                })
                .collect()
        })
        .collect();
    let mut out = RealMatrix::zeros(k, k);
    for (m, row) in rows.into_iter().enumerate() {
        for (n, x) in row?.into_iter().enumerate() {
            out[(m, n)] = x;
        }
    }
    Ok(out)
}

/// `e^{W τ} r`.
pub fn propagate(generator: &RealGenerator, r: &CoordinateVector, tau: f64) -> Result<CoordinateVector> {
    if r.len() != generator.matrix().nrows() {
        return Err(Error::DimensionMismatch(format!(
            "coordinate vector has length {}, generator is {}x{}",
            r.len(),
            generator.matrix().nrows(),
            generator.matrix().ncols()
        )));
    }
    if !r.is_finite() {
        return Err(Error::NonFinite);
    }
    let e = generator.propagator(tau)?;
    Ok(CoordinateVector::from_vector(e * r.vector()))
}
