//! Swap-driven consensus networks.
//!
//! Each edge `{j, k}` of an interaction graph with weight `α_jk` contributes
//! the dissipator `√α_jk · U_jk`, where `U_jk` swaps qubits `j` and `k`. Under
//! column-stacking vectorization the generator is `-L_q` with
//! `L_q = -Σ α_jk (U_jk ⊗ U_jk - I)`, the quantum Laplacian.

use std::sync::OnceLock;

use itertools::Itertools;
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::chain::{MarkovStructure, TransitionMatrix};
use crate::error::{Error, Result};
use crate::hilbert::{validate_density, ComplexMatrix, DensityOp, RealMatrix, MAX_QUBITS, ONE, ZERO};
use crate::lindblad::{qubit_dim, symmetric_matrix_exp, LindbladModel};
use crate::measurement::BooleanState;

/// Largest network for which the dense `N² x N²` quantum Laplacian is formed.
pub const MAX_DENSE_LAPLACIAN_QUBITS: usize = 5;
/// Eigenvalues of `L_q` at or below this are treated as zero.
pub const LAPLACIAN_ZERO_TOL: f64 = 1e-9;

/// Undirected weighted edge between 1-based nodes `j < k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub j: usize,
    pub k: usize,
    pub weight: f64,
}

impl Edge {
    /// Orders the endpoints so that `j < k`.
    pub fn new(a: usize, b: usize, weight: f64) -> Self {
        Edge { j: a.min(b), k: a.max(b), weight }
    }
}

/// Interaction graph on nodes `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl InteractionGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidGraph(format!("node count {n} outside 1..={MAX_QUBITS}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for e in edges {
            let e = Edge::new(e.j, e.k, e.weight);
            if e.j == e.k {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", e.j)));
            }
            if e.j == 0 || e.k > n {
                return Err(Error::InvalidGraph(format!("edge {}-{} outside nodes 1..={n}", e.j, e.k)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidGraph(format!("edge {}-{} has weight {}", e.j, e.k, e.weight)));
            }
            if !seen.insert((e.j, e.k)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {}-{}", e.j, e.k)));
            }
            out.push(e);
        }
        Ok(Self { n, edges: out })
    }

    /// Path `1 - 2 - ... - n` with a common weight.
    pub fn path(n: usize, weight: f64) -> Result<Self> {
        Self::new(n, (1..n).map(|j| Edge::new(j, j + 1, weight)).collect())
    }

    /// Complete graph with a common weight.
    pub fn complete(n: usize, weight: f64) -> Result<Self> {
        Self::new(n, (1..=n).tuple_combinations().map(|(j, k)| Edge::new(j, k, weight)).collect())
    }

    /// A random connected graph: a random spanning tree plus each remaining
    /// pair with probability one half, weights uniform in `[0.1, 2.0]`.
    pub fn random_connected<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut edges = Vec::new();
        for k in 2..=n {
            let j = rng.random_range(1..k);
            edges.push(Edge::new(j, k, rng.random_range(0.1..=2.0)));
        }
        for (j, k) in (1..=n).tuple_combinations() {
            if !edges.iter().any(|e| e.j == j && e.k == k) && rng.random_bool(0.5) {
                edges.push(Edge::new(j, k, rng.random_range(0.1..=2.0)));
            }
        }
        Self::new(n, edges)
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weighted degree of each node, 0-based.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.j - 1] += e.weight;
            d[e.k - 1] += e.weight;
        }
        d
    }

    /// Connected components as sorted lists of 1-based nodes, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label: Vec<usize> = (0..self.n).collect();
        fn find(label: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while label[r] != r {
                r = label[r];
            }
            label[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut label, e.j - 1), find(&mut label, e.k - 1));
            label[a.max(b)] = a.min(b);
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_group = vec![usize::MAX; self.n];
        for v in 0..self.n {
            let r = find(&mut label, v);
            if root_group[r] == usize::MAX {
                root_group[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[root_group[r]].push(v + 1);
        }
        groups
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// `L(G) = D(G) - A(G)`.
    pub fn laplacian(&self) -> RealMatrix {
        let mut l = RealMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            let (a, b) = (e.j - 1, e.k - 1);
            l[(a, a)] += e.weight;
            l[(b, b)] += e.weight;
            l[(a, b)] -= e.weight;
            l[(b, a)] -= e.weight;
        }
        l
    }
}

/// Basis index after swapping qubits `j` and `k` (1-based, qubit 1 is the
/// most significant bit).
fn swap_index(i: usize, j: usize, k: usize, n: usize) -> usize {
    let (bj, bk) = (n - j, n - k);
    if (i >> bj) & 1 == (i >> bk) & 1 {
        i
    } else {
        i ^ ((1 << bj) | (1 << bk))
    }
}

/// Basis index of `U_χ |q_1 ... q_n⟩ = |q_χ(1) ... q_χ(n)⟩`, with `chi`
/// 0-based.
fn permute_index(i: usize, chi: &[usize], n: usize) -> usize {
    (0..n).fold(0, |acc, p| (acc << 1) | ((i >> (n - 1 - chi[p])) & 1))
}

/// Permutation matrix swapping qubits `j` and `k` of an `n`-qubit register.
pub fn swap_unitary(j: usize, k: usize, n: usize) -> Result<ComplexMatrix> {
    let dim = qubit_dim(n)?;
    if !(1 <= j && j < k && k <= n) {
        return Err(Error::IndexOutOfRange { index: j.max(k), max: n });
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        u[(swap_index(i, j, k, n), i)] = ONE;
    }
    Ok(u)
}

/// Quantum Laplacian of a graph, kept as one index permutation of the
/// `N²` vectorized entries per edge.
#[derive(Debug, Clone)]
pub struct QuantumLaplacian {
    n: usize,
    dim: usize,
    terms: Vec<(f64, Vec<usize>)>,
    eigen: OnceLock<SymmetricEigen<f64, nalgebra::Dyn>>,
}

/// Builds `L_q(G) = -Σ α_jk (U_jk ⊗ U_jk - I)`.
pub fn quantum_laplacian(graph: &InteractionGraph) -> QuantumLaplacian {
    let n = graph.nodes();
    let dim = 1 << n;
    let terms = graph
        .edges()
        .iter()
        .map(|e| {
            let perm = (0..dim * dim)
                .map(|v| {
                    let (col, row) = (v / dim, v % dim);
                    swap_index(col, e.j, e.k, n) * dim + swap_index(row, e.j, e.k, n)
                })
                .collect();
            (e.weight, perm)
        })
        .collect();
    QuantumLaplacian { n, dim, terms, eigen: OnceLock::new() }
}

impl QuantumLaplacian {
    pub fn qubits(&self) -> usize {
        self.n
    }

    /// `N`; the Laplacian itself is `N² x N²`.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    /// Dense `N² x N²` matrix; at most [`MAX_DENSE_LAPLACIAN_QUBITS`] qubits.
    pub fn matrix(&self) -> Result<RealMatrix> {
        if self.n > MAX_DENSE_LAPLACIAN_QUBITS {
            return Err(Error::DimensionCap {
                dim: self.dim * self.dim,
                max: 1 << (2 * MAX_DENSE_LAPLACIAN_QUBITS),
                max_qubits: MAX_DENSE_LAPLACIAN_QUBITS,
            });
        }
        let big = self.dim * self.dim;
        let mut l = RealMatrix::zeros(big, big);
        for (w, perm) in &self.terms {
            for (v, &pv) in perm.iter().enumerate() {
                l[(v, v)] += w;
                l[(pv, v)] -= w;
            }
        }
        Ok(l)
    }

    /// `L_q x` without forming the matrix.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(x.len());
        for (w, perm) in &self.terms {
            for (v, &pv) in perm.iter().enumerate() {
                y[v] += w * x[v];
                y[pv] -= w * x[v];
            }
        }
        y
    }

    /// `E_N^T L_q E_N`, the block acting on diagonal embeddings
    /// `e_i ⊗ e_i`. That subspace is invariant, so the heat kernel of this
    /// block is the compression of the full heat kernel.
    pub fn diagonal_block(&self) -> RealMatrix {
        let mut b = RealMatrix::zeros(self.dim, self.dim);
        for (w, perm) in &self.terms {
            for i in 0..self.dim {
                let pi = perm[i * self.dim + i] / self.dim;
                b[(i, i)] += w;
                b[(pi, i)] -= w;
            }
        }
        b
    }

    fn eigen(&self) -> Result<&SymmetricEigen<f64, nalgebra::Dyn>> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let m = self.matrix()?;
        Ok(self.eigen.get_or_init(|| m.symmetric_eigen()))
    }

    /// Eigenvalues of the dense Laplacian, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = self.eigen()?.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Smallest eigenvalue above [`LAPLACIAN_ZERO_TOL`], if any.
    pub fn min_nonzero_eigenvalue(&self) -> Result<Option<f64>> {
        Ok(self.eigenvalues()?.into_iter().find(|&x| x > LAPLACIAN_ZERO_TOL))
    }

    /// `e^{-s L_q}` applied to `vec(ρ)`.
    pub fn evolve(&self, rho: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
        if s < 0.0 {
            return Err(Error::NegativeDuration(s));
        }
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "state is {}x{}, network has dimension {}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        let e = self.eigen()?;
        let q = &e.eigenvectors;
        let decay = e.eigenvalues.map(|l| (-s * l).exp());
        let flow = |x: DVector<f64>| -> DVector<f64> {
            let c = q.tr_mul(&x).component_mul(&decay);
            q * c
        };
        let re = flow(DVector::from_iterator(self.dim * self.dim, rho.iter().map(|z| z.re)));
        let im = flow(DVector::from_iterator(self.dim * self.dim, rho.iter().map(|z| z.im)));
        Ok(ComplexMatrix::from_iterator(
            self.dim,
            self.dim,
            re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)),
        ))
    }
}

/// `P_τ = E_N^T e^{-τ L_q(G)} E_N`.
pub fn consensus_transition(graph: &InteractionGraph, tau: f64) -> Result<TransitionMatrix> {
    if tau < 0.0 {
        return Err(Error::NegativeDuration(tau));
    }
    let lq = quantum_laplacian(graph);
    let p = symmetric_matrix_exp(&(lq.diagonal_block() * -tau))?;
    TransitionMatrix::from_raw(graph.nodes(), tau, p)
}

/// The consensus master equation as a Lindblad model: `H = 0`,
/// `V_jk = √α_jk U_jk`.
pub fn consensus_as_lindblad(graph: &InteractionGraph) -> Result<LindbladModel> {
    let n = graph.nodes();
    let dim = qubit_dim(n)?;
    let dissipators = graph
        .edges()
        .iter()
        .map(|e| swap_unitary(e.j, e.k, n).map(|u| u.scale(e.weight.sqrt())))
        .collect::<Result<Vec<_>>>()?;
    LindbladModel::new(ComplexMatrix::zeros(dim, dim), dissipators)
}

/// Hamming-weight partition of `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPrediction {
    pub n: usize,
    /// `classes[w]` holds the 0-based indices of weight `w`, ascending.
    pub classes: Vec<Vec<usize>>,
}

impl ClassPrediction {
    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Whether the communication classes equal the prediction as sets.
    pub fn matches(&self, structure: &MarkovStructure) -> bool {
        let mut got = structure.classes.clone();
        got.sort();
        let mut want = self.classes.clone();
        want.sort();
        got == want
    }
}

pub fn predicted_classes(n: usize) -> Result<ClassPrediction> {
    let dim = qubit_dim(n)?;
    let mut classes = vec![Vec::new(); n + 1];
    for i in 0..dim {
        classes[i.count_ones() as usize].push(i);
    }
    Ok(ClassPrediction { n, classes })
}

/// `(1/n!) Σ_χ U_χ ρ U_χ†` over all qubit permutations.
pub fn projection_consensus(rho: &DensityOp, n: usize) -> Result<DensityOp> {
    let dim = qubit_dim(n)?;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch(format!("state has dimension {}, expected {dim}", rho.dim())));
    }
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut count = 0usize;
    for chi in (0..n).permutations(n) {
        let map: Vec<usize> = (0..dim).map(|i| permute_index(i, &chi, n)).collect();
        for c in 0..dim {
            for r in 0..dim {
                out[(map[r], map[c])] += m[(r, c)];
            }
        }
        count += 1;
    }
    validate_density(out.unscale(count as f64))
}

/// Evolves `|g⟩⟨g|` under the consensus equation to every `s` of the grid and
/// returns the largest Frobenius distance to the span of
/// `{U_χ |g⟩⟨g| U_χ†}`.
pub fn invariant_subspace_residual(g: &BooleanState, graph: &InteractionGraph, s_grid: &[f64]) -> Result<f64> {
    let n = graph.nodes();
    if g.len() != n {
        return Err(Error::DimensionMismatch(format!("{}-bit state on a {n}-node graph", g.len())));
    }
    let dim = 1 << n;
    let lq = quantum_laplacian(graph);
    let mut rho0 = ComplexMatrix::zeros(dim, dim);
    rho0[(g.index(), g.index())] = ONE;
    let orbit: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == g.weight()).collect();
    let mut worst: f64 = 0.0;
    for &s in s_grid {
        let rho = lq.evolve(&rho0, s)?;
        let mut residual = rho.clone();
        for &h in &orbit {
            residual[(h, h)] = ZERO;
        }
        worst = worst.max(residual.norm());
    }
    Ok(worst)
}

/// Classical heat kernel `e^{-τ L(G)}` and its sign pattern.
#[derive(Debug, Clone)]
pub struct HeatKernelReport {
    pub kernel: RealMatrix,
    pub min_entry: f64,
    pub connected: bool,
    /// Components as 1-based node lists.
    pub components: Vec<Vec<usize>>,
    /// Largest absolute entry coupling two different components.
    pub off_block_max: f64,
    /// Smallest entry within a component.
    pub min_in_block: f64,
}

impl HeatKernelReport {
    /// Entrywise positive.
    pub fn is_positive(&self) -> bool {
        self.min_entry > 0.0
    }
}

/// Computes `e^{-τ L(G)}` with a recurrence that only adds nonnegative
/// numbers (uniformization: `L = cI - A` with `A ≥ 0`), so structural zeros
/// stay exactly zero and positive entries never cancel.
pub fn classical_heat_kernel_positive(graph: &InteractionGraph, tau: f64) -> Result<HeatKernelReport> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("heat kernel time {tau} must be positive")));
    }
    let n = graph.nodes();
    let l = graph.laplacian();
    let c = graph.degrees().into_iter().fold(0.0, f64::max);
    let a = RealMatrix::identity(n, n) * c - &l;

    let mut squarings = 0u32;
    let mut h = tau;
    while h * c > 0.5 {
        h /= 2.0;
        squarings += 1;
    }
    let step = a * h;
    let mut term = RealMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..60 {
        term = &term * &step / k as f64;
        sum += &term;
        if term.max() <= f64::EPSILON * 1e-3 {
            break;
        }
    }
    let mut kernel = sum * (-c * h).exp();
    for _ in 0..squarings {
        kernel = &kernel * &kernel;
    }

    let components = graph.components();
    let mut comp_of = vec![0; n];
    for (k, comp) in components.iter().enumerate() {
        for &v in comp {
            comp_of[v - 1] = k;
        }
    }
    let mut off_block_max: f64 = 0.0;
    let mut min_in_block = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if comp_of[i] == comp_of[j] {
                min_in_block = min_in_block.min(kernel[(i, j)]);
            } else {
                off_block_max = off_block_max.max(kernel[(i, j)].abs());
            }
        }
    }
    Ok(HeatKernelReport {
        min_entry: kernel.min(),
        kernel,
        connected: components.len() == 1,
        components,
        off_block_max,
        min_in_block,
    })
}
