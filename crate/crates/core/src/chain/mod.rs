//! The induced Boolean chain: its exact transition matrix, structural
//! analysis, stationary behavior and expected post-measurement state.

mod scan;
mod stationary;
mod structure;

pub use scan::{tau_scan, Regime, TauScan, TauScanPoint};
pub use stationary::{
    expected_post_measurement, stationary_distribution, Distribution, POWER_ITERATION_CAP,
};
pub use structure::{default_epsilon, markov_structure, MarkovStructure};

use crate::error::{Error, Result};
use crate::hilbert::RealMatrix;
use crate::lindblad::{steady_state, RealGenerator};
use crate::measurement::ThetaMatrix;

/// Entries down to `-NEGATIVE_DUST` are rounding and clamp to zero.
pub const NEGATIVE_DUST: f64 = 1e-9;
/// Rows whose sum deviates from one by at most this much are renormalized;
/// larger deviations are errors.
pub const ROW_SUM_TOL: f64 = 1e-8;

/// Row-stochastic transition matrix of the chain on `{0,1}^n`; entry `(i, j)`
/// is the probability of moving from outcome `i` to outcome `j` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    tau: f64,
    matrix: RealMatrix,
}

impl TransitionMatrix {
    /// Applies the dust policy to a raw matrix: entries in
    /// `[-NEGATIVE_DUST, 0)` clamp to zero, then rows are renormalized when
    /// their sum is within `ROW_SUM_TOL` of one. Anything worse is an error.
    pub fn from_raw(n: usize, tau: f64, mut matrix: RealMatrix) -> Result<Self> {
        let dim = 1usize.checked_shl(n as u32).unwrap_or(0);
        if n == 0 || matrix.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix is {}x{}, expected 2^{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let x = matrix[(i, j)];
                if !x.is_finite() {
                    return Err(Error::NonFinite);
                }
                if x < -NEGATIVE_DUST || x > 1.0 + NEGATIVE_DUST {
                    return Err(Error::ProbabilityRange { row: i, col: j, value: x });
                }
                if x < 0.0 {
                    matrix[(i, j)] = 0.0;
                }
            }
            let sum: f64 = matrix.row(i).sum();
            let deviation = (sum - 1.0).abs();
            if deviation > ROW_SUM_TOL {
                return Err(Error::RowSum { row: i, sum, deviation });
            }
            matrix.row_mut(i).unscale_mut(sum);
        }
        Ok(Self { n, tau, matrix })
    }

    /// The chain that never moves.
    pub fn identity(n: usize, tau: f64) -> Result<Self> {
        let dim = 1usize << n;
        Self::from_raw(n, tau, RealMatrix::identity(dim, dim))
    }

    /// Qubit count.
    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Number of states, `2^n`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.matrix[(from, to)]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }

    /// Max-norm of `P - P^T`.
    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).abs().max()
    }

    /// Max-norm distance to another matrix of the same shape.
    pub fn max_distance(&self, other: &TransitionMatrix) -> f64 {
        (&self.matrix - &other.matrix).abs().max()
    }
}

fn check_shapes(generator: &RealGenerator, theta: &ThetaMatrix) -> Result<()> {
    if theta.matrix().nrows() != generator.matrix().nrows() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} rows, generator is {}x{}",
            theta.matrix().nrows(),
            generator.matrix().nrows(),
            generator.matrix().ncols()
        )));
    }
    Ok(())
}

/// Exact transition matrix at measurement period `tau`:
/// `P[i][j] = θ_j^T e^{W τ} θ_i`, i.e. the transpose of `Θ^T e^{W τ} Θ`.
pub fn transition_matrix(generator: &RealGenerator, theta: &ThetaMatrix, tau: f64) -> Result<TransitionMatrix> {
    check_shapes(generator, theta)?;
    let propagator = generator.propagator(tau)?;
    let t = theta.matrix();
    let raw = (t.transpose() * propagator * t).transpose();
    TransitionMatrix::from_raw(theta.qubits(), tau, raw)
}

/// `tau -> ∞` limit for relaxing dynamics: every row equals `Θ^T θ_⋆`.
pub fn limit_transition(generator: &RealGenerator, theta: &ThetaMatrix) -> Result<TransitionMatrix> {
    check_shapes(generator, theta)?;
    let report = steady_state(generator)?;
    let steady = match (&report.steady_coordinate, report.is_relaxing) {
        (Some(s), true) => s,
        _ => return Err(Error::NotRelaxing { kernel_dimension: report.kernel_dimension }),
    };
    let row = theta.matrix().transpose() * steady.vector();
    let dim = row.len();
    let raw = RealMatrix::from_fn(dim, dim, |_, j| row[j]);
    TransitionMatrix::from_raw(theta.qubits(), f64::INFINITY, raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_generator, gell_mann_basis, LindbladModel};
    use crate::measurement::{network_projectors, theta_matrix, QubitMeasurement};

    fn setup(model: &LindbladModel, m: &QubitMeasurement, n: usize) -> (RealGenerator, ThetaMatrix) {
        let b = gell_mann_basis(1 << n).unwrap();
        let g = build_generator(model, &b).unwrap();
        let t = theta_matrix(&network_projectors(m, n).unwrap(), &b).unwrap();
        (g, t)
    }

    #[test]
    fn zero_duration_is_identity() {
        let (g, t) = setup(&LindbladModel::depolarizing(2, 1.0).unwrap(), &QubitMeasurement::from_angles(0.4, 0.2), 2);
        let p = transition_matrix(&g, &t, 0.0).unwrap();
        assert!((p.matrix() - RealMatrix::identity(4, 4)).abs().max() < 1e-14);
    }

    #[test]
    fn amplitude_damping_half_life_chain() {
        let (g, t) = setup(&LindbladModel::amplitude_damping(1, 1.0).unwrap(), &QubitMeasurement::computational(), 1);
        let p = transition_matrix(&g, &t, std::f64::consts::LN_2).unwrap();
        let want = RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        assert!((p.matrix() - want).abs().max() < 1e-14);
    }

    #[test]
    fn limit_for_amplitude_damping_and_depolarizing() {
        let (g, t) = setup(&LindbladModel::amplitude_damping(2, 1.0).unwrap(), &QubitMeasurement::computational(), 2);
        let p = limit_transition(&g, &t).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if j == 0 { 1.0 } else { 0.0 };
                assert!((p.get(i, j) - want).abs() < 1e-9);
            }
        }
        let (g, t) = setup(&LindbladModel::depolarizing(2, 0.5).unwrap(), &QubitMeasurement::from_angles(1.0, 0.3), 2);
        let p = limit_transition(&g, &t).unwrap();
        assert!(p.matrix().iter().all(|&x| (x - 0.25).abs() < 1e-9));
    }

    #[test]
    fn limit_requires_relaxing() {
        let (g, t) = setup(&LindbladModel::trivial(2).unwrap(), &QubitMeasurement::computational(), 1);
        assert!(matches!(limit_transition(&g, &t), Err(Error::NotRelaxing { .. })));
    }

    #[test]
    fn dust_policy() {
        let ok = RealMatrix::from_row_slice(2, 2, &[1.0 + 5e-10, -5e-10, 0.3, 0.7 + 1e-9]);
        let p = TransitionMatrix::from_raw(1, 1.0, ok).unwrap();
        assert_eq!(p.get(0, 1), 0.0);
        assert!(p.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-15));

        let negative = RealMatrix::from_row_slice(2, 2, &[1.0, -1e-6, 0.5, 0.5]);
        assert!(matches!(TransitionMatrix::from_raw(1, 1.0, negative), Err(Error::ProbabilityRange { .. })));
        let drift = RealMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.5, 0.5]);
        assert!(matches!(TransitionMatrix::from_raw(1, 1.0, drift), Err(Error::RowSum { row: 0, .. })));
        assert!(TransitionMatrix::from_raw(1, 1.0, RealMatrix::identity(3, 3)).is_err());
    }
}
