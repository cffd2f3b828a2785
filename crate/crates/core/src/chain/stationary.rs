use nalgebra::{DMatrix, DVector};

use super::{markov_structure, TransitionMatrix};
use crate::error::{Error, Result};
use crate::hilbert::{validate_density, ComplexMatrix, DensityOp};

/// Iteration cap for power iteration.
pub const POWER_ITERATION_CAP: usize = 1_000_000;
const POWER_ITERATION_TOL: f64 = 1e-12;
const CROSS_CHECK_TOL: f64 = 1e-9;
const DISTRIBUTION_TOL: f64 = 1e-10;

/// A probability vector over the `2^n` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some((i, &x)) = p.iter().enumerate().find(|(_, &x)| x < 0.0) {
            return Err(Error::ProbabilityRange { row: 0, col: i, value: x });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::ProbabilitySum { sum, deviation: (sum - 1.0).abs() });
        }
        Ok(Self(p))
    }

    pub fn uniform(dim: usize) -> Self {
        Self(vec![1.0 / dim as f64; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ_i |p_i - q_i| / 2`.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
    }

    /// `‖π P - π‖_1`.
    pub fn balance_residual(&self, p: &TransitionMatrix) -> f64 {
        let pi = DVector::from_column_slice(&self.0);
        let next = p.matrix().tr_mul(&pi);
        (next - pi).lp_norm(1)
    }
}

/// The unique `π = π P` of an irreducible aperiodic chain, by power
/// iteration from the uniform distribution, cross-checked against a direct
/// linear solve.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Distribution> {
    let structure = markov_structure(p, None)?;
    if !(structure.irreducible && structure.aperiodic) {
        return Err(Error::NotErgodic);
    }
    let pt = p.matrix().transpose();
    let dim = p.dim();
    let mut pi = DVector::from_element(dim, 1.0 / dim as f64);
    let mut converged = false;
    for _ in 0..POWER_ITERATION_CAP {
        let next = &pt * &pi;
        let diff = (&next - &pi).lp_norm(1);
        pi = next;
        if diff <= POWER_ITERATION_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: POWER_ITERATION_CAP });
    }
    let sum = pi.sum();
    pi.unscale_mut(sum);

    let direct = solve_balance(p)?;
    let difference = (&pi - direct).amax();
    if difference > CROSS_CHECK_TOL {
        return Err(Error::CrossCheck { difference });
    }
    Distribution::new(pi.iter().map(|&x| x.max(0.0)).collect())
}

/// Solves `(P^T - I) π = 0` with the last equation replaced by `Σ π = 1`.
fn solve_balance(p: &TransitionMatrix) -> Result<DVector<f64>> {
    let dim = p.dim();
    let mut a: DMatrix<f64> = p.matrix().transpose() - DMatrix::identity(dim, dim);
    a.row_mut(dim - 1).fill(1.0);
    let mut b = DVector::zeros(dim);
    b[dim - 1] = 1.0;
    a.lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("stationary balance equations".into()))
}

/// `Σ_i π_i M_[i]`.
pub fn expected_post_measurement(pi: &Distribution, projectors: &[ComplexMatrix]) -> Result<DensityOp> {
    if pi.len() != projectors.len() || projectors.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {} projectors",
            pi.len(),
            projectors.len()
        )));
    }
    let dim = projectors[0].nrows();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for (&w, m) in pi.as_slice().iter().zip(projectors) {
        if m.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch("projectors differ in shape".into()));
        }
        rho += m.scale(w);
    }
    validate_density(rho)
}
