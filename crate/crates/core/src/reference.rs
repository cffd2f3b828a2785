//! Published reference values for the three-qubit path-graph consensus
//! network measured in the computational basis at `tau = 1`.

use crate::consensus::InteractionGraph;
use crate::error::Result;

/// Measurement period of the reference matrix.
pub const PATH3_TAU: f64 = 1.0;

/// Tolerance matching the three printed decimals.
pub const PATH3_TOLERANCE: f64 = 5e-4;

/// Transition matrix as printed, rows and columns in index order
/// `000, 001, ..., 111`.
#[rustfmt::skip]
pub const PATH3_TRANSITION: [[f64; 8]; 8] = [
    [1.0, 0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0],
    [0.0, 0.525, 0.317, 0.0,   0.158, 0.0,   0.0,   0.0],
    [0.0, 0.317, 0.366, 0.0,   0.317, 0.0,   0.0,   0.0],
    [0.0, 0.0,   0.0,   0.525, 0.0,   0.317, 0.158, 0.0],
    [0.0, 0.158, 0.317, 0.0,   0.525, 0.0,   0.0,   0.0],
    [0.0, 0.0,   0.0,   0.317, 0.0,   0.366, 0.317, 0.0],
    [0.0, 0.0,   0.0,   0.158, 0.0,   0.317, 0.525, 0.0],
    [0.0, 0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   1.0],
];

/// Unit-weight path `1 - 2 - 3`.
pub fn path3_graph() -> Result<InteractionGraph> {
    InteractionGraph::path(3, 1.0)
}
