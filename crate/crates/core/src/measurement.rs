//! Qubit measurement bases, network projectors and the projector coordinate
//! matrix `Θ`.
//!
//! Outcomes are bit strings `[i_1 ... i_n]` with qubit 1 as the most
//! significant bit. [`btoi`] gives the 1-based index `Σ i_k 2^(n-k) + 1`;
//! [`BooleanState::index`] is the 0-based twin used for matrix addressing.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{projector, ComplexMatrix, PureState, RealMatrix, MAX_QUBITS};
use crate::lindblad::{qubit_dim, HermitianBasis};

/// Tolerance on `|<v0|v1>|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Tolerance on `Θ^T Θ = I`.
pub const THETA_TOL: f64 = 1e-10;

/// A single-qubit projective measurement `λ0 |v0><v0| + λ1 |v1><v1|`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitMeasurement {
    v0: PureState,
    v1: PureState,
    /// Outcome labels; carried as metadata, bit 0 is `λ0` and bit 1 is `λ1`.
    pub labels: (f64, f64),
}

impl QubitMeasurement {
    pub fn new(v0: PureState, v1: PureState) -> Result<Self> {
        if v0.dim() != 2 || v1.dim() != 2 {
            return Err(Error::DimensionMismatch("measurement vectors must be qubit states".into()));
        }
        let overlap = v0.inner(&v1).norm();
        if overlap > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { overlap });
        }
        Ok(Self { v0, v1, labels: (0.0, 1.0) })
    }

    /// `v0 = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`, `v1 = -e^{-iφ} sin(θ/2)|0> + cos(θ/2)|1>`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let phase = Complex64::from_polar(1.0, phi);
        let v0 = DVector::from_vec(vec![Complex64::new(c, 0.0), phase * s]);
        let v1 = DVector::from_vec(vec![-phase.conj() * s, Complex64::new(c, 0.0)]);
        Self {
            v0: PureState::normalized(v0).expect("unit vector"),
            v1: PureState::normalized(v1).expect("unit vector"),
            labels: (0.0, 1.0),
        }
    }

    pub fn computational() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    pub fn with_labels(mut self, l0: f64, l1: f64) -> Self {
        self.labels = (l0, l1);
        self
    }

    /// Eigenvector for outcome bit `b`.
    pub fn vector(&self, bit: bool) -> &PureState {
        if bit {
            &self.v1
        } else {
            &self.v0
        }
    }
}

/// An `n`-bit measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanState {
    n: usize,
    index: usize,
}

impl BooleanState {
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() || bits.len() > usize::BITS as usize - 1 {
            return Err(Error::InvalidArgument(format!("bit string length {}", bits.len())));
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        Ok(Self { n: bits.len(), index })
    }

    /// From a 0-based index.
    pub fn from_index(index: usize, n: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::InvalidArgument(format!("bit string length {n}")));
        }
        if index >= 1 << n {
            return Err(Error::IndexOutOfRange { index: index + 1, max: 1 << n });
        }
        Ok(Self { n, index })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// 0-based index, most significant bit first.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Bit of qubit `k` (1-based).
    pub fn bit(&self, k: usize) -> bool {
        assert!(k >= 1 && k <= self.n, "qubit {k} out of range 1..={}", self.n);
        (self.index >> (self.n - k)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (1..=self.n).map(|k| self.bit(k)).collect()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.index.count_ones() as usize
    }

    /// All `2^n` states in index order.
    pub fn all(n: usize) -> impl Iterator<Item = BooleanState> {
        (0..1usize << n).map(move |index| BooleanState { n, index })
    }
}

impl fmt::Display for BooleanState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BooleanState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBitString(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits).map_err(|_| Error::InvalidBitString(s.to_string()))
    }
}

/// 1-based index `Σ i_k 2^(n-k) + 1`.
pub fn btoi(bits: &BooleanState) -> usize {
    bits.index + 1
}

/// Inverse of [`btoi`].
pub fn itob(i: usize, n: usize) -> Result<BooleanState> {
    if i == 0 {
        return Err(Error::IndexOutOfRange { index: 0, max: 1usize.checked_shl(n as u32).unwrap_or(0) });
    }
    BooleanState::from_index(i - 1, n)
}

/// `M_[i] = P_{i_1} ⊗ ... ⊗ P_{i_n}` for every outcome, in index order.
pub fn network_projectors(m: &QubitMeasurement, n: usize) -> Result<Vec<ComplexMatrix>> {
    qubit_dim(n)?;
    Ok(BooleanState::all(n).map(|s| projector(&product_ket(m, &s))).collect())
}

/// `|v_{i_1} ... v_{i_n}>`.
pub fn product_ket(m: &QubitMeasurement, state: &BooleanState) -> PureState {
    let mut ket = m.vector(state.bit(1)).clone();
    for k in 2..=state.len() {
        ket = ket.tensor(m.vector(state.bit(k)));
    }
    ket
}

/// `N^2 x N` matrix whose column `i` holds the coordinates of projector `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    n: usize,
    matrix: RealMatrix,
}

impl ThetaMatrix {
    /// Qubit count.
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// Coordinates of projector `i` (0-based).
    pub fn column(&self, i: usize) -> DVector<f64> {
        self.matrix.column(i).into_owned()
    }

    /// Max-norm of `Θ^T Θ - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.matrix.transpose() * &self.matrix;
        let k = gram.nrows();
        (gram - RealMatrix::identity(k, k)).abs().max()
    }
}

/// Builds `Θ` from network projectors.
pub fn theta_matrix(projectors: &[ComplexMatrix], basis: &HermitianBasis) -> Result<ThetaMatrix> {
    let count = projectors.len();
    if count < 2 || !count.is_power_of_two() || count != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{count} projectors for basis dimension {}",
            basis.dim()
        )));
    }
    let n = count.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::DimensionCap { dim: count, max: 1 << MAX_QUBITS, max_qubits: MAX_QUBITS });
    }
    let mut matrix = RealMatrix::zeros(basis.len(), count);
    for (i, p) in projectors.iter().enumerate() {
        let r = basis.coordinates_of(p)?;
        matrix.set_column(i, r.vector());
    }
    let theta = ThetaMatrix { n, matrix };
    let err = theta.orthonormality_error();
    if err > THETA_TOL {
        return Err(Error::InvalidBasis(format!("projector coordinates are not orthonormal (error {err:e})")));
    }
    let id = basis.identity_slot();
    let want = 1.0 / (count as f64).sqrt();
    if let Some(i) = (0..count).find(|&i| (theta.matrix[(id, i)] - want).abs() > THETA_TOL) {
        return Err(Error::InvalidBasis(format!("projector {i} does not have unit trace")));
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{max_norm, real_matrix};
    use crate::lindblad::gell_mann_basis;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn same_projector(a: &PureState, b: &PureState) -> bool {
        max_norm(&(projector(a) - projector(b))) < 1e-14
    }

    fn ket(a: f64, b: f64) -> PureState {
        PureState::new(DVector::from_vec(vec![a.into(), b.into()])).unwrap()
    }

    #[test]
    fn angle_parametrization() {
        let m = QubitMeasurement::from_angles(0.0, 0.0);
        assert!(same_projector(m.vector(false), &ket(1.0, 0.0)));
        assert!(same_projector(m.vector(true), &ket(0.0, 1.0)));
        assert_eq!(m.vector(false).amplitudes()[0], Complex64::new(1.0, 0.0));

        let m = QubitMeasurement::from_angles(PI, 0.0);
        assert!(same_projector(m.vector(false), &ket(0.0, 1.0)));
        assert!(same_projector(m.vector(true), &ket(-1.0, 0.0)));

        let m = QubitMeasurement::from_angles(PI / 2.0, 0.0);
        assert!(same_projector(m.vector(false), &ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2)));
        assert!(same_projector(m.vector(true), &ket(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)));

        assert!(QubitMeasurement::new(ket(1.0, 0.0), ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).is_err());
    }

    #[test]
    fn index_maps() {
        let s: BooleanState = "001".parse().unwrap();
        assert_eq!(btoi(&s), 2);
        assert_eq!(btoi(&"000".parse().unwrap()), 1);
        assert_eq!(btoi(&"111".parse().unwrap()), 8);
        assert_eq!(itob(2, 3).unwrap().to_string(), "001");
        assert_eq!(itob(1, 3).unwrap().to_string(), "000");
        assert_eq!(itob(8, 3).unwrap().to_string(), "111");
        assert!(itob(0, 3).is_err());
        assert!(itob(9, 3).is_err());
        assert!("01x".parse::<BooleanState>().is_err());
        assert!("".parse::<BooleanState>().is_err());
    }

    #[test]
    fn index_maps_are_inverse_exhaustively() {
        for n in 1..=MAX_QUBITS {
            for i in 1..=(1 << n) {
                let s = itob(i, n).unwrap();
                assert_eq!(btoi(&s), i);
                assert_eq!(BooleanState::from_bits(&s.bits()).unwrap(), s);
                assert_eq!(s.to_string().parse::<BooleanState>().unwrap(), s);
            }
        }
    }

    #[test]
    fn computational_projectors() {
        let p = network_projectors(&QubitMeasurement::computational(), 1).unwrap();
        assert_eq!(p[0], real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(p[1], real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        let p = network_projectors(&QubitMeasurement::computational(), 2).unwrap();
        for (i, m) in p.iter().enumerate() {
            let mut want = ComplexMatrix::zeros(4, 4);
            want[(i, i)] = 1.0.into();
            assert_eq!(*m, want);
        }
    }

    #[test]
    fn projectors_resolve_identity() {
        let p = network_projectors(&QubitMeasurement::from_angles(PI / 3.0, PI / 5.0), 2).unwrap();
        let sum = p.iter().fold(ComplexMatrix::zeros(4, 4), |acc, m| acc + m);
        assert!(max_norm(&(sum - ComplexMatrix::identity(4, 4))) < 1e-14);
        assert!(network_projectors(&QubitMeasurement::computational(), 7).is_err());
    }

    #[test]
    fn theta_for_single_qubit() {
        let b = gell_mann_basis(2).unwrap();
        let p = network_projectors(&QubitMeasurement::computational(), 1).unwrap();
        let t = theta_matrix(&p, &b).unwrap();
        // slot 0 = diag(1,-1)/sqrt2, slot 3 = I/sqrt2
        assert!((t.matrix()[(0, 0)] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((t.matrix()[(3, 0)] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(t.matrix()[(1, 0)], 0.0);
        assert_eq!(t.matrix()[(2, 0)], 0.0);
        assert!((t.matrix()[(0, 1)] + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn theta_rejects_mismatch() {
        let b = gell_mann_basis(4).unwrap();
        let p = network_projectors(&QubitMeasurement::computational(), 1).unwrap();
        assert!(matches!(theta_matrix(&p, &b), Err(Error::DimensionMismatch(_))));
    }

    proptest! {
        #[test]
        fn theta_is_orthonormal(theta in 0.0..PI, phi in -PI..PI, n in 1usize..=3) {
            let b = gell_mann_basis(1 << n).unwrap();
            let p = network_projectors(&QubitMeasurement::from_angles(theta, phi), n).unwrap();
            let t = theta_matrix(&p, &b).unwrap();
            prop_assert!(t.orthonormality_error() <= 1e-10);
            for i in 0..(1 << n) {
                let c = t.column(i);
                prop_assert!((c.dot(&c) - 1.0).abs() <= 1e-10);
            }
        }
    }
}
