//! Dense complex linear algebra and quantum-state primitives.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Largest supported network size. The real generator is `4^n x 4^n`.
pub const MAX_QUBITS: usize = 6;
/// Largest Hilbert-space dimension, `2^MAX_QUBITS`.
pub const MAX_DIM: usize = 1 << MAX_QUBITS;
/// Largest matrix side `tensor_product` will build. Superoperators on the
/// largest network are `MAX_DIM^2` wide.
pub const MAX_TENSOR_DIM: usize = MAX_DIM * MAX_DIM;

/// Max-norm tolerance on `rho - rho^dag`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `|tr(rho) - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density operator.
pub const PSD_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted for a state produced by propagation.
pub const EVOLVED_PSD_TOL: f64 = 1e-7;
/// Tolerance on `| ||v|| - 1 |` for pure states.
pub const NORM_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Kronecker product `a ⊗ b`; block `(i, j)` of the result is `a[i,j] * b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_TENSOR_DIM && c <= MAX_TENSOR_DIM => (r, c),
        (r, c) => {
            return Err(Error::DimensionCap {
                dim: r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX)),
                max: MAX_TENSOR_DIM,
                max_qubits: MAX_QUBITS,
            })
        }
    };
    let (br, bc) = b.shape();
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    }))
}

/// Max-norm of `m - m^dag`.
pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max-norm of a complex matrix.
pub fn max_norm(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Smallest eigenvalue of a Hermitian matrix. Only the Hermitian part is used.
pub fn min_hermitian_eigenvalue(m: &ComplexMatrix) -> f64 {
    let sym = (m + m.adjoint()).scale(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Accepts `v` if its norm is within [`NORM_TOL`] of one, then removes the
    /// residual so the stored norm is one to rounding.
    pub fn new(v: DVector<Complex64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes: v.unscale(norm) })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: DVector<Complex64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes: v.unscale(norm) })
    }

    /// Computational basis ket `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index: index + 1, max: dim });
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|self> ⊗ |other>`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let a = &self.amplitudes;
        let b = &other.amplitudes;
        let v = DVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()]);
        PureState { amplitudes: v }
    }
}

/// Outer product `|v><v|`.
pub fn projector(state: &PureState) -> ComplexMatrix {
    let v = state.amplitudes();
    v * v.adjoint()
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    matrix: ComplexMatrix,
}

impl DensityOp {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim, dim).unscale(dim as f64);
        Self { matrix: m }
    }

    pub fn pure(state: &PureState) -> Self {
        Self { matrix: projector(state) }
    }

    /// Validates a state produced by numerical propagation, where eigenvalues
    /// down to `-EVOLVED_PSD_TOL` are rounding.
    pub fn from_evolved(m: ComplexMatrix) -> Result<Self> {
        validate_with(m, EVOLVED_PSD_TOL)
    }

    /// `tr(self * op)` for Hermitian `op`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        trace(&(&self.matrix * op)).re
    }
}

/// Checks the density-operator invariants. Nothing is normalized.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityOp> {
    validate_with(m, PSD_TOL)
}

fn validate_with(m: ComplexMatrix, psd_tol: f64) -> Result<DensityOp> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 {
        return Err(Error::NotSquare { rows, cols });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let residual = hermitian_residual(&m);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let tr = trace(&m).re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne { trace: tr });
    }
    let min_eigenvalue = min_hermitian_eigenvalue(&m);
    if min_eigenvalue < -psd_tol {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(DensityOp { matrix: m })
}

/// Builds a complex matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(tensor_product(&i2, &i2).unwrap(), ComplexMatrix::identity(4, 4));
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let p0 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p1 = real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let got = tensor_product(&p0, &p1).unwrap();
        let mut want = ComplexMatrix::zeros(4, 4);
        want[(1, 1)] = ONE;
        assert_eq!(got, want);
    }

    #[test]
    fn x_tensor_x_maps_00_to_11() {
        let xx = tensor_product(&pauli_x(), &pauli_x()).unwrap();
        let e0 = DVector::from_fn(4, |i, _| if i == 0 { ONE } else { ZERO });
        let out = xx * e0;
        for (i, z) in out.iter().enumerate() {
            assert_eq!(*z, if i == 3 { ONE } else { ZERO });
        }
    }

    #[test]
    fn tensor_cap() {
        let big = ComplexMatrix::identity(MAX_TENSOR_DIM, 1);
        let two = ComplexMatrix::identity(2, 1);
        assert!(matches!(tensor_product(&big, &two), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn projector_examples() {
        let zero = PureState::basis(2, 0).unwrap();
        assert_eq!(projector(&zero), real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let plus = PureState::new(DVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]))
            .unwrap();
        let p = projector(&plus);
        for z in p.iter() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }

        let plus_i = PureState::new(DVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]))
            .unwrap();
        let p = projector(&plus_i);
        let want = [[c(0.5, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.5, 0.0)]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - want[i][j]).norm() < 1e-15);
            }
        }
        assert!((trace(&p).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projector_rejects_unnormalized() {
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(1e-4, 0.0)]);
        assert!(matches!(PureState::new(v), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn validate_density_examples() {
        assert!(validate_density(ComplexMatrix::identity(2, 2).unscale(2.0)).is_ok());
        assert!(matches!(
            validate_density(ComplexMatrix::identity(2, 2)),
            Err(Error::TraceNotOne { trace }) if (trace - 2.0).abs() < 1e-15
        ));
        // eigenvalues 0.5 ± sqrt(0.01 + 0.36) = 0.5 ± 0.6083
        let m = real_matrix(2, 2, &[0.6, 0.6, 0.6, 0.4]);
        match validate_density(m) {
            Err(Error::NotPsd { min_eigenvalue }) => {
                assert!((min_eigenvalue - (0.5 - 0.37_f64.sqrt())).abs() < 1e-12)
            }
            other => panic!("expected NotPsd, got {other:?}"),
        }
        let mut skew = ComplexMatrix::identity(2, 2).unscale(2.0);
        skew[(0, 1)] = c(0.0, 0.1);
        assert!(matches!(validate_density(skew), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            validate_density(ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    fn int_matrix(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, cdim)| {
            proptest::collection::vec((-3i32..=3, -3i32..=3), r * cdim).prop_map(move |v| {
                ComplexMatrix::from_row_iterator(
                    r,
                    cdim,
                    v.into_iter().map(|(a, b)| c(a as f64, b as f64)),
                )
            })
        })
    }

    fn square_matrix(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        (1..=max_dim).prop_flat_map(|n| {
            proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n * n).prop_map(move |v| {
                ComplexMatrix::from_row_iterator(n, n, v.into_iter().map(|(a, b)| c(a, b)))
            })
        })
    }

    proptest! {
        #[test]
        fn tensor_is_associative(a in int_matrix(3), b in int_matrix(3), d in int_matrix(2)) {
            let left = tensor_product(&tensor_product(&a, &b).unwrap(), &d).unwrap();
            let right = tensor_product(&a, &tensor_product(&b, &d).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn trace_is_multiplicative(a in square_matrix(4), b in square_matrix(4)) {
            let lhs = trace(&tensor_product(&a, &b).unwrap());
            let rhs = trace(&a) * trace(&b);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }

        #[test]
        fn projector_is_idempotent(v in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..9)) {
            prop_assume!(v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
            let state = PureState::normalized(DVector::from_iterator(v.len(), v.iter().map(|&(a, b)| c(a, b)))).unwrap();
            let p = projector(&state);
            prop_assert!(max_norm(&(&p * &p - &p)) <= 1e-12);
            prop_assert!(hermitian_residual(&p) <= 1e-15);
        }
    }
}
