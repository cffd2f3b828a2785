use nalgebra::linalg::Schur;

use super::basis::CoordinateVector;
use super::generator::RealGenerator;
use crate::error::{Error, Result};

/// Nonzero modes must decay faster than this for the dynamics to relax.
pub const RELAXATION_MARGIN: f64 = 1e-10;

/// Kernel and spectral summary of a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    /// Dimension of the kernel of `W`.
    pub kernel_dimension: usize,
    /// Coordinates of the unique trace-one steady state, when it exists.
    pub steady_coordinate: Option<CoordinateVector>,
    pub is_relaxing: bool,
    /// Largest real part among the eigenvalues outside the kernel; `0.0`
    /// when every eigenvalue belongs to the kernel.
    pub spectral_abscissa_nonzero_modes: f64,
}

/// Eigen-analysis of `W`: kernel dimension from the singular values, the
/// remaining spectrum from a Schur decomposition.
pub fn steady_state(generator: &RealGenerator) -> Result<SteadyStateReport> {
    let w = generator.matrix().clone();
    let k = w.nrows();
    let scale = w.abs().max().max(1.0);
    let kernel_tol = 1e-9 * scale;

    let svd = nalgebra::linalg::SVD::try_new(w.clone(), false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenSolver("SVD did not converge".into()))?;
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::EigenSolver("missing right singular vectors".into()))?;
    let kernel_rows: Vec<usize> = (0..k).filter(|&i| svd.singular_values[i] <= kernel_tol).collect();
    let kernel_dimension = kernel_rows.len();

    let schur = Schur::try_new(w, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenSolver("Schur decomposition did not converge".into()))?;
    let mut eigenvalues: Vec<_> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let nonzero = &eigenvalues[kernel_dimension.min(eigenvalues.len())..];
    let spectral_abscissa_nonzero_modes = if nonzero.is_empty() {
        0.0
    } else {
        nonzero.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    };

    let dim = generator.dim() as f64;
    let id = generator.identity_slot();
    let steady_coordinate = if kernel_dimension == 1 {
        let v = v_t.row(kernel_rows[0]).transpose();
        if v[id].abs() < 1e-12 {
            None
        } else {
            // the identity coordinate of any trace-one state is 1/sqrt(N)
            let target = 1.0 / dim.sqrt();
            Some(CoordinateVector::from_vector(v.scale(target / v[id])))
        }
    } else {
        None
    };

    let is_relaxing = kernel_dimension == 1
        && steady_coordinate.is_some()
        && nonzero.iter().all(|z| z.re < -RELAXATION_MARGIN);

    Ok(SteadyStateReport {
        kernel_dimension,
        steady_coordinate,
        is_relaxing,
        spectral_abscissa_nonzero_modes,
    })
}
