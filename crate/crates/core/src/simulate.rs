//! Monte-Carlo runs of the measured dynamics.
//!
//! Between measurements the state evolves exactly: the propagator `e^{Wτ}` is
//! computed once, and the outcome distribution from outcome `i` is
//! `p_j = θ_j^T e^{Wτ} θ_i`. Rows are computed on first visit and cached.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{TransitionMatrix, NEGATIVE_DUST};
use crate::consensus::{consensus_transition, InteractionGraph};
use crate::error::{Error, Result};
use crate::hilbert::{DensityOp, RealMatrix};
use crate::lindblad::{build_generator, gell_mann_basis, LindbladModel};
use crate::measurement::{network_projectors, product_ket, theta_matrix, BooleanState, QubitMeasurement, ThetaMatrix};

/// Largest allowed deviation of a probability row sum from one before
/// renormalization.
pub const SAMPLING_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum ModelSpec {
    Lindblad(LindbladModel),
    /// Swap-driven consensus on a graph; its chain does not depend on the
    /// measurement basis.
    Consensus(InteractionGraph),
}

impl ModelSpec {
    pub fn qubits(&self) -> Result<usize> {
        match self {
            ModelSpec::Consensus(g) => Ok(g.nodes()),
            ModelSpec::Lindblad(m) => {
                let d = m.dim();
                if d.is_power_of_two() && d >= 2 {
                    Ok(d.trailing_zeros() as usize)
                } else {
                    Err(Error::DimensionMismatch(format!("model dimension {d} is not a power of two")))
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum InitialCondition {
    /// Start at a known outcome.
    Bits(BooleanState),
    /// Measure this state first.
    Density(DensityOp),
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub model: ModelSpec,
    pub measurement: QubitMeasurement,
    pub tau: f64,
    pub steps: usize,
    pub initial: InitialCondition,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryRecord {
    /// `steps + 1` outcomes, the first being the initial outcome.
    pub outcomes: Vec<BooleanState>,
}

enum Backend {
    Lindblad { propagator: RealMatrix, theta: ThetaMatrix },
    Consensus(TransitionMatrix),
}

/// Precomputed propagator plus a lazily filled table of cumulative outcome
/// distributions, one per source outcome. Safe to share across threads.
pub struct Simulator {
    n: usize,
    tau: f64,
    measurement: QubitMeasurement,
    backend: Backend,
    rows: Vec<OnceLock<Result<Vec<f64>>>>,
}

impl Simulator {
    pub fn new(model: &ModelSpec, measurement: &QubitMeasurement, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::NegativeDuration(tau));
        }
        let n = model.qubits()?;
        let backend = match model {
            ModelSpec::Lindblad(m) => {
                let basis = gell_mann_basis(m.dim())?;
                let generator = build_generator(m, &basis)?;
                let theta = theta_matrix(&network_projectors(measurement, n)?, &basis)?;
                Backend::Lindblad { propagator: generator.propagator(tau)?, theta }
            }
            ModelSpec::Consensus(g) => Backend::Consensus(consensus_transition(g, tau)?),
        };
        Ok(Self {
            n,
            tau,
            measurement: measurement.clone(),
            backend,
            rows: (0..1 << n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Outcome probabilities from outcome `i` before any clamping.
    pub fn raw_row(&self, i: usize) -> Result<Vec<f64>> {
        let dim = 1 << self.n;
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, max: dim - 1 });
        }
        Ok(match &self.backend {
            Backend::Lindblad { propagator, theta } => {
                let r = propagator * theta.column(i);
                theta.matrix().tr_mul(&r).iter().copied().collect()
            }
            Backend::Consensus(p) => p.matrix().row(i).iter().copied().collect(),
        })
    }

    fn cumulative(&self, i: usize) -> Result<&[f64]> {
        let row = self.rows[i].get_or_init(|| sanitize(self.raw_row(i)?, i).map(cumulate));
        row.as_deref().map_err(Clone::clone)
    }

    fn initial_outcome(&self, rho: &DensityOp, rng: &mut ChaCha8Rng) -> Result<BooleanState> {
        if rho.dim() != 1 << self.n {
            return Err(Error::DimensionMismatch(format!(
                "initial state has dimension {}, expected {}",
                rho.dim(),
                1 << self.n
            )));
        }
        let p = BooleanState::all(self.n)
            .map(|s| {
                let v = product_ket(&self.measurement, &s);
                let a = v.amplitudes();
                (a.adjoint() * rho.matrix() * a)[(0, 0)].re
            })
            .collect();
        let cum = cumulate(sanitize(p, usize::MAX)?);
        BooleanState::from_index(sample(&cum, rng), self.n)
    }

    /// Runs `steps` measurement periods from `initial` with a ChaCha8 stream
    /// seeded by `seed`.
    pub fn run(&self, initial: &InitialCondition, steps: usize, seed: u64) -> Result<TrajectoryRecord> {
        if steps == 0 {
            return Err(Error::InvalidArgument("a trajectory needs at least one step".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = match initial {
            InitialCondition::Bits(b) => {
                if b.len() != self.n {
                    return Err(Error::DimensionMismatch(format!("{}-bit start for {} qubits", b.len(), self.n)));
                }
                b.clone()
            }
            InitialCondition::Density(rho) => self.initial_outcome(rho, &mut rng)?,
        };
        let mut outcomes = Vec::with_capacity(steps + 1);
        let mut current = first.index();
        outcomes.push(first);
        for _ in 0..steps {
            current = sample(self.cumulative(current)?, &mut rng);
            outcomes.push(BooleanState::from_index(current, self.n)?);
        }
        Ok(TrajectoryRecord { outcomes })
    }
}

/// Dust policy: entries in `[-1e-9, 0)` become zero, then the row is
/// renormalized if its sum is within [`SAMPLING_SUM_TOL`] of one.
fn sanitize(mut p: Vec<f64>, row: usize) -> Result<Vec<f64>> {
    for (col, x) in p.iter_mut().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if *x < -NEGATIVE_DUST || *x > 1.0 + NEGATIVE_DUST {
            return Err(Error::ProbabilityRange { row, col, value: *x });
        }
        *x = x.max(0.0);
    }
    let sum: f64 = p.iter().sum();
    let deviation = (sum - 1.0).abs();
    if deviation > SAMPLING_SUM_TOL {
        return Err(Error::ProbabilitySum { sum, deviation });
    }
    p.iter_mut().for_each(|x| *x /= sum);
    Ok(p)
}

fn cumulate(p: Vec<f64>) -> Vec<f64> {
    p.into_iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn sample(cum: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random::<f64>() * cum[cum.len() - 1];
    match cum.iter().position(|&c| u < c) {
        Some(j) => j,
        // u landed on the total; take the last outcome with mass
        None => (1..cum.len()).rev().find(|&j| cum[j] > cum[j - 1]).unwrap_or(0),
    }
}

pub fn run_trajectory(cfg: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    Simulator::new(&cfg.model, &cfg.measurement, cfg.tau)?.run(&cfg.initial, cfg.steps, cfg.seed)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of trajectory `index` in a batch: the SplitMix64 output function
/// applied to `base + index * 0x9E3779B97F4A7C15` (wrapping). The step is
/// odd and the mix is a bijection, so seeds are distinct for distinct
/// indices.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent trajectories with seeds `derive_seed(base, i)`, returned in
/// index order. `cfg.seed` is ignored.
pub fn batch_run(cfg: &TrajectoryConfig, trajectories: usize, base: u64) -> Result<Vec<TrajectoryRecord>> {
    if trajectories == 0 {
        return Err(Error::InvalidArgument("at least one trajectory is required".into()));
    }
    let sim = Simulator::new(&cfg.model, &cfg.measurement, cfg.tau)?;
    (0..trajectories)
        .into_par_iter()
        .map(|i| sim.run(&cfg.initial, cfg.steps, derive_seed(base, i as u64)))
        .collect()
}

/// Transition counts and row frequencies from recorded trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTransition {
    pub n: usize,
    /// `counts[i][j]`: observed moves from `i` to `j`.
    pub counts: Vec<Vec<u64>>,
    /// Row-normalized counts; `None` for never-visited rows.
    pub frequencies: Vec<Option<Vec<f64>>>,
}

impl EmpiricalTransition {
    pub fn visits(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn frequency(&self, i: usize, j: usize) -> Option<f64> {
        self.frequencies[i].as_ref().map(|r| r[j])
    }
}

pub fn empirical_transition(records: &[TrajectoryRecord], n: usize) -> Result<EmpiricalTransition> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no trajectories to count".into()));
    }
    let dim = 1 << n;
    let mut counts = vec![vec![0u64; dim]; dim];
    for rec in records {
        if rec.outcomes.iter().any(|s| s.len() != n) {
            return Err(Error::DimensionMismatch(format!("record is not over {n} bits")));
        }
        for w in rec.outcomes.windows(2) {
            counts[w[0].index()][w[1].index()] += 1;
        }
    }
    let frequencies = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            (total > 0).then(|| row.iter().map(|&c| c as f64 / total as f64).collect())
        })
        .collect();
    Ok(EmpiricalTransition { n, counts, frequencies })
}
