use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::TransitionMatrix;
use crate::error::{Error, Result};

/// Communication classes and related structure of a chain.
///
/// States are 0-based indices. Classes are sorted internally and ordered by
/// their smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovStructure {
    pub classes: Vec<Vec<usize>>,
    /// Class index of every state.
    pub class_of: Vec<usize>,
    /// Edges `(from, to)` of the condensation: class `to` is reachable in one
    /// step from class `from`.
    pub class_dag: Vec<(usize, usize)>,
    /// Classes with no edge leaving them.
    pub closed: Vec<bool>,
    pub absorbing: Vec<usize>,
    /// Period of each class; classes without an internal cycle report 1.
    pub periods: Vec<u64>,
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Threshold used for the support graph.
    pub epsilon: f64,
    /// Entries within a decade of `epsilon` either side, where the support
    /// graph is sensitive to the threshold.
    pub fragile_entries: usize,
}

/// `1e-10` times the largest entry of `p`.
pub fn default_epsilon(p: &TransitionMatrix) -> f64 {
    1e-10 * p.matrix().max()
}

/// Builds the support digraph `i -> j iff P_ij > ε` and analyzes it.
/// `epsilon = None` uses [`default_epsilon`].
pub fn markov_structure(p: &TransitionMatrix, epsilon: Option<f64>) -> Result<MarkovStructure> {
    let eps = epsilon.unwrap_or_else(|| default_epsilon(p));
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("positivity threshold {eps} must lie in (0, 1)")));
    }
    let n = p.dim();
    let m = p.matrix();

    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * 4);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut fragile_entries = 0;
    for i in 0..n {
        for j in 0..n {
            let x = m[(i, j)];
            if x >= eps / 10.0 && x <= eps * 10.0 {
                fragile_entries += 1;
            }
            if x > eps {
                graph.add_edge(nodes[i], nodes[j], ());
                succ[i].push(j);
            }
        }
    }
    if fragile_entries > 0 {
        log::warn!("{fragile_entries} transition entries lie within a decade of the threshold {eps:e}");
    }

    let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    classes.sort_unstable_by_key(|c| c[0]);

    let mut class_of = vec![0; n];
    for (k, c) in classes.iter().enumerate() {
        for &s in c {
            class_of[s] = k;
        }
    }

    let mut dag = BTreeSet::new();
    for i in 0..n {
        for &j in &succ[i] {
            if class_of[i] != class_of[j] {
                dag.insert((class_of[i], class_of[j]));
            }
        }
    }
    let class_dag: Vec<(usize, usize)> = dag.into_iter().collect();
    let mut closed = vec![true; classes.len()];
    for &(from, _) in &class_dag {
        closed[from] = false;
    }

    let absorbing = (0..n)
        .filter(|&i| m[(i, i)] > 1.0 - eps && succ[i].iter().all(|&j| j == i))
        .collect();

    let periods: Vec<u64> = classes.iter().map(|c| class_period(c, &succ, &class_of)).collect();
    let irreducible = classes.len() == 1;
    let aperiodic = periods.iter().all(|&d| d == 1);

    Ok(MarkovStructure {
        classes,
        class_of,
        class_dag,
        closed,
        absorbing,
        periods,
        irreducible,
        aperiodic,
        epsilon: eps,
        fragile_entries,
    })
}

/// gcd of `level(u) + 1 - level(v)` over the edges inside the class, with
/// levels from a BFS rooted at the smallest member.
fn class_period(class: &[usize], succ: &[Vec<usize>], class_of: &[usize]) -> u64 {
    let root = class[0];
    let k = class_of[root];
    let mut level = vec![usize::MAX; succ.len()];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &succ[u] {
            if class_of[v] != k {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    for &u in class {
        for &v in &succ[u] {
            if class_of[v] == k {
                let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
                g = gcd(g, diff);
            }
        }
    }
    if g == 0 {
        1
    } else {
        g
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
