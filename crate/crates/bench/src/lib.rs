//! Fixtures shared by the benchmarks.

use mibn_core::{
    build_generator, gell_mann_basis, network_projectors, theta_matrix, InteractionGraph, LindbladModel,
    QubitMeasurement, RealGenerator, Result, ThetaMatrix,
};

/// Depolarizing qubits measured along a tilted axis.
pub fn depolarizing_chain(n: usize) -> Result<(RealGenerator, ThetaMatrix)> {
    let model = LindbladModel::depolarizing(n, 0.8)?;
    let basis = gell_mann_basis(model.dim())?;
    let w = build_generator(&model, &basis)?;
    let theta = theta_matrix(&network_projectors(&QubitMeasurement::from_angles(0.6, 0.3), n)?, &basis)?;
    Ok((w, theta))
}

/// Path graph `1-2-...-n` with unit weights.
pub fn path(n: usize) -> Result<InteractionGraph> {
    InteractionGraph::path(n, 1.0)
}
