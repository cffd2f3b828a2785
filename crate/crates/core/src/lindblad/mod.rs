//! Lindblad models, their realification in a Hermitian basis, and the
//! resulting linear dynamics `dr/ds = W r`.

mod basis;
mod expm;
mod generator;
mod steady;

pub use basis::{
    from_coordinates, gell_mann_basis, to_coordinates, CoordinateVector, HermitianBasis,
    COORDINATE_IMAG_TOL, ORTHONORMAL_TOL,
};
pub use expm::{expm, matrix_exp, symmetric_matrix_exp};
pub use generator::{build_generator, propagate, RealGenerator, GENERATOR_IMAG_TOL};
pub use steady::{steady_state, SteadyStateReport, RELAXATION_MARGIN};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    hermitian_residual, real_matrix, tensor_product, ComplexMatrix, HERMITIAN_TOL, MAX_DIM,
    MAX_QUBITS,
};

/// `ds ρ = -i[H, ρ] + Σ_d (V_d ρ V_d^† - ½{V_d^† V_d, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: ComplexMatrix,
    dissipators: Vec<ComplexMatrix>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, dissipators: Vec<ComplexMatrix>) -> Result<Self> {
        let (rows, cols) = hamiltonian.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows > MAX_DIM {
            return Err(Error::DimensionCap { dim: rows, max: MAX_DIM, max_qubits: MAX_QUBITS });
        }
        if rows < 2 {
            return Err(Error::InvalidArgument(format!("model dimension {rows} < 2")));
        }
        let residual = hermitian_residual(&hamiltonian);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        for (d, v) in dissipators.iter().enumerate() {
            if v.shape() != (rows, rows) {
                return Err(Error::DimensionMismatch(format!(
                    "dissipator {d} is {}x{}, Hamiltonian is {rows}x{rows}",
                    v.nrows(),
                    v.ncols()
                )));
            }
        }
        let all = std::iter::once(&hamiltonian).chain(&dissipators);
        if all.flat_map(|m| m.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim: rows, hamiltonian, dissipators })
    }

    /// The model with `H = 0` and no dissipators.
    pub fn trivial(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::zeros(dim, dim), Vec::new())
    }

    /// Independent amplitude damping `V_k = sqrt(γ)|0><1|` on each of `n` qubits.
    pub fn amplitude_damping(n: usize, gamma: f64) -> Result<Self> {
        check_rate(gamma)?;
        let lower = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]).scale(gamma.sqrt());
        let dissipators = (1..=n).map(|q| embed_qubit_operator(&lower, q, n)).collect::<Result<_>>()?;
        let dim = qubit_dim(n)?;
        Self::new(ComplexMatrix::zeros(dim, dim), dissipators)
    }

    /// Depolarizing noise on each of `n` qubits: `V = sqrt(γ/4) σ_a` for the
    /// three Pauli matrices, so every Bloch component decays at rate `γ`.
    pub fn depolarizing(n: usize, gamma: f64) -> Result<Self> {
        check_rate(gamma)?;
        let c = (gamma / 4.0).sqrt();
        let x = real_matrix(2, 2, &[0.0, c, c, 0.0]);
        let mut y = ComplexMatrix::zeros(2, 2);
        y[(0, 1)] = Complex64::new(0.0, -c);
        y[(1, 0)] = Complex64::new(0.0, c);
        let z = real_matrix(2, 2, &[c, 0.0, 0.0, -c]);
        let mut dissipators = Vec::with_capacity(3 * n);
        for q in 1..=n {
            for p in [&x, &y, &z] {
                dissipators.push(embed_qubit_operator(p, q, n)?);
            }
        }
        let dim = qubit_dim(n)?;
        Self::new(ComplexMatrix::zeros(dim, dim), dissipators)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[ComplexMatrix] {
        &self.dissipators
    }
}

fn check_rate(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rate {gamma} must be finite and nonnegative")))
    }
}

pub(crate) fn qubit_dim(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::DimensionCap { dim: 1usize << n.min(63), max: MAX_DIM, max_qubits: MAX_QUBITS });
    }
    Ok(1 << n)
}

/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` acting on qubit `q` (1-based, qubit 1
/// most significant).
pub fn embed_qubit_operator(op: &ComplexMatrix, q: usize, n: usize) -> Result<ComplexMatrix> {
    qubit_dim(n)?;
    if q == 0 || q > n {
        return Err(Error::IndexOutOfRange { index: q, max: n });
    }
    let left = ComplexMatrix::identity(1 << (q - 1), 1 << (q - 1));
    let right = ComplexMatrix::identity(1 << (n - q), 1 << (n - q));
    tensor_product(&tensor_product(&left, op)?, &right)
}
