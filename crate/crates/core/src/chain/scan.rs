use rayon::prelude::*;

use super::{markov_structure, transition_matrix, MarkovStructure, TransitionMatrix};
use crate::error::{Error, Result};
use crate::lindblad::RealGenerator;
use crate::measurement::ThetaMatrix;

/// Long-measurement-period regimes of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Exactly one absorbing state, and it forms the only closed class, so
    /// every trajectory ends there.
    UniqueAbsorbing(usize),
    /// Irreducible and aperiodic.
    Ergodic,
}

impl Regime {
    pub fn of(structure: &MarkovStructure) -> Option<Regime> {
        if structure.irreducible && structure.aperiodic {
            return Some(Regime::Ergodic);
        }
        let closed = structure.closed.iter().filter(|&&c| c).count();
        match structure.absorbing.as_slice() {
            [only] if closed == 1 => Some(Regime::UniqueAbsorbing(*only)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TauScanPoint {
    pub tau: f64,
    pub transition: TransitionMatrix,
    pub structure: MarkovStructure,
    pub regime: Option<Regime>,
}

#[derive(Debug, Clone)]
pub struct TauScan {
    /// One entry per grid point, in grid order.
    pub points: Vec<TauScanPoint>,
}

impl TauScan {
    /// Smallest grid `tau` at which a regime holds, and that regime.
    pub fn first_regime(&self) -> Option<(f64, Regime)> {
        self.points.iter().find_map(|p| p.regime.map(|r| (p.tau, r)))
    }

    /// Smallest grid `tau` from which the regime holds at every larger grid
    /// point.
    pub fn settled_regime(&self) -> Option<(f64, Regime)> {
        let last = self.points.last()?.regime?;
        let start = self
            .points
            .iter()
            .rposition(|p| p.regime != Some(last))
            .map_or(0, |k| k + 1);
        Some((self.points[start].tau, last))
    }
}

/// Transition matrix and structure at every `tau` of a sorted positive grid.
pub fn tau_scan(generator: &RealGenerator, theta: &ThetaMatrix, grid: &[f64]) -> Result<TauScan> {
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("tau grid must be strictly increasing and positive".into()));
    }
    let points = grid
        .par_iter()
        .map(|&tau| {
            let transition = transition_matrix(generator, theta, tau)?;
            let structure = markov_structure(&transition, None)?;
            let regime = Regime::of(&structure);
            Ok(TauScanPoint { tau, transition, structure, regime })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TauScan { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_generator, gell_mann_basis, LindbladModel};
    use crate::measurement::{network_projectors, theta_matrix, QubitMeasurement};

    fn scan(model: LindbladModel, m: QubitMeasurement, n: usize, grid: &[f64]) -> TauScan {
        let b = gell_mann_basis(1 << n).unwrap();
        let g = build_generator(&model, &b).unwrap();
        let t = theta_matrix(&network_projectors(&m, n).unwrap(), &b).unwrap();
        tau_scan(&g, &t, grid).unwrap()
    }

    const GRID: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

    #[test]
    fn ground_state_steady_state_gives_unique_absorbing() {
        let s = scan(LindbladModel::amplitude_damping(2, 1.0).unwrap(), QubitMeasurement::computational(), 2, &GRID);
        assert_eq!(s.settled_regime().map(|r| r.1), Some(Regime::UniqueAbsorbing(0)));
    }

    #[test]
    fn full_support_steady_state_gives_ergodic() {
        let m = QubitMeasurement::from_angles(std::f64::consts::FRAC_PI_3, 0.0);
        let s = scan(LindbladModel::amplitude_damping(2, 1.0).unwrap(), m, 2, &GRID);
        assert_eq!(s.settled_regime().map(|r| r.1), Some(Regime::Ergodic));
    }

    #[test]
    fn frozen_dynamics_never_settle() {
        let s = scan(LindbladModel::trivial(4).unwrap(), QubitMeasurement::computational(), 2, &GRID);
        assert!(s.first_regime().is_none());
        let id = crate::hilbert::RealMatrix::identity(4, 4);
        assert!(s.points.iter().all(|p| (p.transition.matrix() - &id).amax() < 1e-14));
        assert_eq!(s.points.iter().map(|p| p.tau).collect::<Vec<_>>(), GRID.to_vec());
    }

    #[test]
    fn rejects_bad_grid() {
        let b = gell_mann_basis(2).unwrap();
        let g = crate::lindblad::RealGenerator::zero(&b);
        let t = theta_matrix(&network_projectors(&QubitMeasurement::computational(), 1).unwrap(), &b).unwrap();
        assert!(tau_scan(&g, &t, &[1.0, 0.5]).is_err());
        assert!(tau_scan(&g, &t, &[0.0, 0.5]).is_err());
    }
}
