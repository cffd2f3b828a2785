use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{hermitian_residual, ComplexMatrix, DensityOp, MAX_DIM, MAX_QUBITS, ZERO};

/// Tolerance on `tr(σ_m σ_n) = δ_mn`.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Tolerance on the imaginary part of a coordinate `tr(ρ σ_k)`.
pub const COORDINATE_IMAG_TOL: f64 = 1e-8;

pub(crate) type SparseEntries = Vec<(usize, usize, Complex64)>;

/// Orthonormal basis of Hermitian `N x N` matrices under `tr(A B)`.
///
/// The Gell-Mann layout puts the element built from `|p><q|` at slot
/// `p + q*N` (0-based): symmetric combinations above the diagonal,
/// antisymmetric ones below, traceless diagonals on the first `N-1` diagonal
/// slots, and `I/sqrt(N)` at the last slot.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    sparse: Vec<SparseEntries>,
    identity_slot: usize,
}

/// Generalized Gell-Mann basis of dimension `n`.
pub fn gell_mann_basis(n: usize) -> Result<HermitianBasis> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("basis dimension {n} < 2")));
    }
    if n > MAX_DIM {
        return Err(Error::DimensionCap { dim: n, max: MAX_DIM, max_qubits: MAX_QUBITS });
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut sparse: Vec<SparseEntries> = vec![Vec::new(); n * n];
    for q in 0..n {
        for p in 0..q {
            sparse[p + q * n] = vec![(p, q, Complex64::new(r, 0.0)), (q, p, Complex64::new(r, 0.0))];
            sparse[q + p * n] = vec![(p, q, Complex64::new(0.0, -r)), (q, p, Complex64::new(0.0, r))];
        }
    }
    // λ_pp for 1-based p = 1..N-1
    for p in 1..n {
        let norm = 1.0 / ((p + p * p) as f64).sqrt();
        let mut entries: SparseEntries = (0..p).map(|k| (k, k, Complex64::new(norm, 0.0))).collect();
        entries.push((p, p, Complex64::new(-(p as f64) * norm, 0.0)));
        sparse[(p - 1) * (n + 1)] = entries;
    }
    let id = 1.0 / (n as f64).sqrt();
    let identity_slot = n * n - 1;
    sparse[identity_slot] = (0..n).map(|k| (k, k, Complex64::new(id, 0.0))).collect();

    let elements = sparse.iter().map(|e| dense(n, e)).collect();
    Ok(HermitianBasis { dim: n, elements, sparse, identity_slot })
}

fn dense(n: usize, entries: &SparseEntries) -> ComplexMatrix {
    let mut m = ComplexMatrix::from_element(n, n, ZERO);
    for &(r, c, v) in entries {
        m[(r, c)] += v;
    }
    m
}

fn sparsify(m: &ComplexMatrix) -> SparseEntries {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)] != ZERO {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

impl HermitianBasis {
    /// Builds a basis from arbitrary elements, checking every invariant. The
    /// identity element must be `+I/sqrt(N)`.
    pub fn from_elements(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::InvalidBasis("empty basis".into()))?;
        if elements.len() != dim * dim {
            return Err(Error::InvalidBasis(format!(
                "{} elements for dimension {dim}",
                elements.len()
            )));
        }
        if let Some(bad) = elements.iter().position(|m| m.shape() != (dim, dim)) {
            return Err(Error::InvalidBasis(format!("element {bad} has the wrong shape")));
        }
        for (k, m) in elements.iter().enumerate() {
            let residual = hermitian_residual(m);
            if residual > 1e-12 {
                return Err(Error::InvalidBasis(format!(
                    "element {k} is not Hermitian (residual {residual:e})"
                )));
            }
        }
        let ident = ComplexMatrix::identity(dim, dim).unscale((dim as f64).sqrt());
        let id_slots: Vec<usize> = elements
            .iter()
            .enumerate()
            .filter(|(_, m)| (*m - &ident).iter().all(|z| z.norm() < 1e-12))
            .map(|(k, _)| k)
            .collect();
        if id_slots.len() != 1 {
            return Err(Error::InvalidBasis(format!(
                "expected exactly one identity element, found {}",
                id_slots.len()
            )));
        }
        let sparse = elements.iter().map(sparsify).collect();
        let basis = Self { dim, elements, sparse, identity_slot: id_slots[0] };
        let err = basis.orthonormality_error();
        if err > ORTHONORMAL_TOL {
            return Err(Error::InvalidBasis(format!("not orthonormal (error {err:e})")));
        }
        Ok(basis)
    }

    /// Reordered copy: slot `k` of the result holds element `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() || order.iter().any(|&k| k >= self.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidArgument("ordering is not a permutation".into()));
        }
        Ok(Self {
            dim: self.dim,
            elements: order.iter().map(|&k| self.elements[k].clone()).collect(),
            sparse: order.iter().map(|&k| self.sparse[k].clone()).collect(),
            identity_slot: order.iter().position(|&k| k == self.identity_slot).unwrap(),
        })
    }

    /// Hilbert-space dimension `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `N^2`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Slot of the element proportional to the identity.
    pub fn identity_slot(&self) -> usize {
        self.identity_slot
    }

    pub(crate) fn sparse(&self, k: usize) -> &SparseEntries {
        &self.sparse[k]
    }

    /// Max over pairs of `|tr(σ_m σ_n) - δ_mn|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for m in 0..self.len() {
            for n in m..self.len() {
                let t = trace_product(&self.sparse[m], &self.sparse[n]);
                let want = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((t - want).norm());
            }
        }
        worst
    }

    /// `tr(m σ_k)` for every `k`; `m` must be Hermitian for the result to be real.
    pub fn coordinates_of(&self, m: &ComplexMatrix) -> Result<CoordinateVector> {
        if m.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, basis dimension {}",
                m.nrows(),
                m.ncols(),
                self.dim
            )));
        }
        let mut out = Vec::with_capacity(self.len());
        for entries in &self.sparse {
            let t = trace_with(m, entries);
            if t.im.abs() > COORDINATE_IMAG_TOL {
                return Err(Error::ImaginaryResidue { residue: t.im.abs(), tolerance: COORDINATE_IMAG_TOL });
            }
            out.push(t.re);
        }
        Ok(CoordinateVector::new(out))
    }

    /// `Σ r_k σ_k`.
    pub fn matrix_of(&self, r: &CoordinateVector) -> Result<ComplexMatrix> {
        if r.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "coordinate vector has length {}, basis has {} elements",
                r.len(),
                self.len()
            )));
        }
        let mut m = ComplexMatrix::from_element(self.dim, self.dim, ZERO);
        for (entries, &rk) in self.sparse.iter().zip(r.as_slice()) {
            if rk != 0.0 {
                for &(row, col, v) in entries {
                    m[(row, col)] += v * rk;
                }
            }
        }
        Ok(m)
    }
}

/// `tr(X σ)` for sparse `σ`.
pub(crate) fn trace_with(x: &ComplexMatrix, sigma: &SparseEntries) -> Complex64 {
    sigma.iter().map(|&(r, c, v)| x[(c, r)] * v).sum()
}

/// `tr(σ_a σ_b)` for sparse operands.
pub(crate) fn trace_product(a: &SparseEntries, b: &SparseEntries) -> Complex64 {
    let mut acc = ZERO;
    for &(r, c, v) in a {
        for &(r2, c2, v2) in b {
            if c == r2 && c2 == r {
                acc += v * v2;
            }
        }
    }
    acc
}

/// `tr(X σ_a σ_b)` for sparse `σ_a`, `σ_b`.
pub(crate) fn trace_triple(x: &ComplexMatrix, a: &SparseEntries, b: &SparseEntries) -> Complex64 {
    let mut acc = ZERO;
    for &(r, c, v) in a {
        for &(r2, c2, v2) in b {
            if c == r2 {
                acc += x[(c2, r)] * v * v2;
            }
        }
    }
    acc
}

/// `tr(V^dag σ_a V σ_b)` for sparse `σ_a`, `σ_b`.
pub(crate) fn trace_sandwich(v: &ComplexMatrix, a: &SparseEntries, b: &SparseEntries) -> Complex64 {
    let mut acc = ZERO;
    for &(r, c, va) in a {
        for &(r2, c2, vb) in b {
            acc += v[(r, c2)].conj() * va * v[(c, r2)] * vb;
        }
    }
    acc
}

/// Real coordinates of a Hermitian matrix in a [`HermitianBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateVector(nalgebra::DVector<f64>);

impl CoordinateVector {
    pub fn new(v: Vec<f64>) -> Self {
        Self(nalgebra::DVector::from_vec(v))
    }

    pub fn from_vector(v: nalgebra::DVector<f64>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &nalgebra::DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> nalgebra::DVector<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl std::ops::Index<usize> for CoordinateVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// `r_k = tr(ρ σ_k)`.
pub fn to_coordinates(rho: &DensityOp, basis: &HermitianBasis) -> Result<CoordinateVector> {
    basis.coordinates_of(rho.matrix())
}

/// `Σ r_k σ_k`, not validated as a density operator.
pub fn from_coordinates(r: &CoordinateVector, basis: &HermitianBasis) -> Result<ComplexMatrix> {
    if !r.is_finite() {
        return Err(Error::NonFinite);
    }
    basis.matrix_of(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{max_norm, real_matrix, validate_density};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn qubit_basis_is_scaled_paulis() {
        let b = gell_mann_basis(2).unwrap();
        let x = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]).scale(FRAC_1_SQRT_2);
        let mut y = ComplexMatrix::zeros(2, 2);
        y[(0, 1)] = Complex64::new(0.0, -FRAC_1_SQRT_2);
        y[(1, 0)] = Complex64::new(0.0, FRAC_1_SQRT_2);
        let z = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]).scale(FRAC_1_SQRT_2);
        let i = ComplexMatrix::identity(2, 2).scale(FRAC_1_SQRT_2);
        // slots p + q*N (0-based): (0,1)->2 sym, (1,0)->1 antisym, (0,0)->0 diag, 3 identity
        assert!(max_norm(&(b.element(2) - x)) < 1e-15);
        assert!(max_norm(&(b.element(1) - y)) < 1e-15);
        assert!(max_norm(&(b.element(0) - z)) < 1e-15);
        assert!(max_norm(&(b.element(3) - i)) < 1e-15);
        assert_eq!(b.identity_slot(), 3);
    }

    #[test]
    fn orthonormal_for_several_dims() {
        for n in [2, 3, 4, 5, 8, 16] {
            let b = gell_mann_basis(n).unwrap();
            assert_eq!(b.len(), n * n);
            assert!(b.orthonormality_error() <= 1e-12, "n = {n}");
            for m in b.elements() {
                assert!(hermitian_residual(m) <= 1e-12);
            }
            // cross-check the sparse trace against dense multiplication
            let dense_gram = (b.element(0) * b.element(0)).trace();
            assert!((dense_gram.re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(gell_mann_basis(1).is_err());
        assert!(matches!(gell_mann_basis(128), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn coordinates_of_maximally_mixed() {
        for n in [2, 4, 8] {
            let b = gell_mann_basis(n).unwrap();
            let r = to_coordinates(&DensityOp::maximally_mixed(n), &b).unwrap();
            for k in 0..r.len() {
                let want = if k == b.identity_slot() { 1.0 / (n as f64).sqrt() } else { 0.0 };
                assert!((r[k] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn coordinates_of_ket_zero() {
        let b = gell_mann_basis(2).unwrap();
        let rho = validate_density(real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        let r = to_coordinates(&rho, &b).unwrap();
        assert!((r[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((r[3] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
        assert_eq!(r[2], 0.0);
    }

    #[test]
    fn round_trip() {
        let b = gell_mann_basis(4).unwrap();
        let mut m = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        m = (&m + m.adjoint()).scale(0.5);
        let r = b.coordinates_of(&m).unwrap();
        let back = from_coordinates(&r, &b).unwrap();
        assert!(max_norm(&(back - m)) < 1e-12);
    }

    #[test]
    fn coordinate_errors() {
        let b = gell_mann_basis(2).unwrap();
        assert!(matches!(b.coordinates_of(&ComplexMatrix::zeros(3, 3)), Err(Error::DimensionMismatch(_))));
        let mut skew = ComplexMatrix::zeros(2, 2);
        skew[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(b.coordinates_of(&skew), Err(Error::ImaginaryResidue { .. })));
        assert!(matches!(
            from_coordinates(&CoordinateVector::new(vec![0.0; 3]), &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn permuted_basis_keeps_invariants() {
        let b = gell_mann_basis(2).unwrap();
        let p = b.permuted(&[3, 1, 0, 2]).unwrap();
        assert_eq!(p.identity_slot(), 0);
        let rebuilt = HermitianBasis::from_elements(p.elements().to_vec()).unwrap();
        assert_eq!(rebuilt.identity_slot(), 0);
        assert!(b.permuted(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn from_elements_rejects_non_orthonormal() {
        let b = gell_mann_basis(2).unwrap();
        let mut els = b.elements().to_vec();
        els[0] = els[0].scale(2.0);
        assert!(matches!(HermitianBasis::from_elements(els), Err(Error::InvalidBasis(_))));
    }
}
