//! Measurement-induced Boolean dynamics of open quantum networks.
//!
//! An `n`-qubit network evolves under a Lindblad master equation and is
//! measured qubit-wise every `tau` time units. The measurement outcomes form
//! a Markov chain over `{0,1}^n`. This crate builds that chain's exact
//! transition matrix, analyzes its structure, and simulates it.
//!
//! Module map:
//!
//! * [`hilbert`]: dense complex matrices, density operators, projectors.
//! * [`lindblad`]: master-equation models, the generalized Gell-Mann basis,
//!   the real generator of the realified equation, matrix exponentials.
//! * [`measurement`]: qubit measurement bases, network projectors, the
//!   coordinate matrix of the projectors, bit-string/index maps.
//! * [`chain`]: transition matrices, communication classes, periods,
//!   stationary distributions.
//! * [`consensus`]: swap-driven consensus networks and the quantum Laplacian.
//! * [`simulate`]: Monte-Carlo runs of the measured dynamics.

pub mod chain;
pub mod consensus;
mod error;
pub mod hilbert;
pub mod lindblad;
pub mod measurement;
pub mod reference;
pub mod simulate;

pub use error::{Error, Result};

pub use chain::{
    expected_post_measurement, limit_transition, markov_structure, stationary_distribution,
    tau_scan, transition_matrix, Distribution, MarkovStructure, Regime, TauScan, TauScanPoint,
    TransitionMatrix,
};
pub use consensus::{
    classical_heat_kernel_positive, consensus_as_lindblad, consensus_transition,
    invariant_subspace_residual, predicted_classes, projection_consensus, quantum_laplacian,
    swap_unitary, ClassPrediction, Edge, HeatKernelReport, InteractionGraph, QuantumLaplacian,
};
pub use hilbert::{
    projector, tensor_product, validate_density, ComplexMatrix, DensityOp, PureState, RealMatrix,
    MAX_QUBITS,
};
pub use lindblad::{
    build_generator, from_coordinates, gell_mann_basis, matrix_exp, propagate, steady_state,
    to_coordinates, CoordinateVector, HermitianBasis, LindbladModel, RealGenerator,
    SteadyStateReport,
};
pub use measurement::{
    btoi, itob, network_projectors, theta_matrix, BooleanState, QubitMeasurement, ThetaMatrix,
};
pub use simulate::{
    batch_run, derive_seed, empirical_transition, run_trajectory, EmpiricalTransition,
    InitialCondition, ModelSpec, Simulator, TrajectoryConfig, TrajectoryRecord,
};
