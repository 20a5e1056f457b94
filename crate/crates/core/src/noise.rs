//! Marginal-proportional transition matrices and the budgeted forward process.
//!
//! A forward step at level `t` picks exactly `N(t)` nodes and `M(t)` pairs
//! among the picked nodes, then resamples each picked slot from its row of a
//! zero-diagonal transition matrix, so every picked slot changes class.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_pairs, induced_pairs, ClassVocab, Graph, SelectionMask};
use crate::scalar::Scalar;
use crate::schedule::{step_budget, ScheduleParams};

/// Class frequencies of a corpus: `node` has one entry per node class and
/// `edge` one per edge class (no-edge included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals<S> {
    pub node: Vec<S>,
    pub edge: Vec<S>,
}

impl<S: Scalar> Marginals<S> {
    pub fn new(node: Vec<S>, edge: Vec<S>) -> Result<Self> {
        check_distribution(&node, "node marginal")?;
        check_distribution(&edge, "edge marginal")?;
        Ok(Self { node, edge })
    }

    /// Index of a class holding all the mass, if any.
    pub fn degenerate_class(&self) -> Option<usize> {
        degenerate_index(&self.node).or_else(|| degenerate_index(&self.edge))
    }
}

pub(crate) fn check_distribution<S: Scalar>(p: &[S], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= S::zero()) || !x.is_finite()) {
        return Err(Error::InvalidDistribution(format!("{what} has entry {x}")));
    }
    let sum: S = p.iter().copied().sum();
    if (sum - S::one()).abs() > S::prob_tolerance() {
        return Err(Error::InvalidDistribution(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn degenerate_index<S: Scalar>(p: &[S]) -> Option<usize> {
    p.iter().position(|&x| x >= S::one())
}

fn require_nondegenerate<S: Scalar>(p: &[S]) -> Result<()> {
    match degenerate_index(p) {
        Some(class) => Err(Error::DegenerateMarginal { class }),
        None => Ok(()),
    }
}

/// Counts node classes over all nodes and edge classes over all unordered
/// pairs (no-edge pairs included).
pub fn estimate_marginals<S: Scalar>(
    dataset: &[Graph],
    vocab: &ClassVocab,
) -> Result<Marginals<S>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut node_counts = vec![0u64; vocab.node_classes()];
    let mut edge_counts = vec![0u64; vocab.edge_classes()];
    for g in dataset {
        g.validate(vocab)?;
        for &c in g.nodes() {
            node_counts[c] += 1;
        }
        for (i, j) in g.pairs() {
            edge_counts[g.edge(i, j)] += 1;
        }
    }
    let node = normalize_counts(&node_counts);
    let edge = if edge_counts.iter().all(|&c| c == 0) {
        // single-node corpora have no pairs at all
        let mut e = vec![S::zero(); vocab.edge_classes()];
        e[vocab.no_edge()] = S::one();
        e
    } else {
        normalize_counts(&edge_counts)
    };
    Marginals::new(node, edge)
}

fn normalize_counts<S: Scalar>(counts: &[u64]) -> Vec<S> {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| S::lit(c as f64) / S::lit(total as f64))
        .collect()
}

/// Row-stochastic matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<S> {
    pub size: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.size + j]
    }
}

/// `Q_X`, `Q_E`: zero-diagonal, off-diagonal mass proportional to the marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrices<S> {
    pub qx: Matrix<S>,
    pub qe: Matrix<S>,
}

/// `Q[i][j] = m[j] / Σ_{l≠i} m[l]` for `i ≠ j`, zero on the diagonal.
pub fn zero_diagonal_transition<S: Scalar>(m: &[S]) -> Result<Matrix<S>> {
    require_nondegenerate(m)?;
    let size = m.len();
    let total: S = m.iter().copied().sum();
    let mut data = vec![S::zero(); size * size];
    for i in 0..size {
        let rest = total - m[i];
        if !(rest > S::zero()) {
            return Err(Error::DegenerateMarginal { class: i });
        }
        for j in 0..size {
            if i != j {
                data[i * size + j] = m[j] / rest;
            }
        }
    }
    Ok(Matrix { size, data })
}

pub fn build_transitions<S: Scalar>(m: &Marginals<S>) -> Result<TransitionMatrices<S>> {
    Ok(TransitionMatrices {
        qx: zero_diagonal_transition(&m.node)?,
        qe: zero_diagonal_transition(&m.edge)?,
    })
}

/// Class distributions of a fully noised graph, the sampler's starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalMarginals<S> {
    pub node: Vec<S>,
    pub edge: Vec<S>,
}

/// `p_i · Σ_{j≠i} p_j / (1 − p_j)`.
pub fn terminal_node_marginals<S: Scalar>(m: &Marginals<S>) -> Result<Vec<S>> {
    swapped_distribution(&m.node)
}

/// `(1 − r)·p_i + r·p_i·Σ_{l≠i} p_l / (1 − p_l)`.
pub fn terminal_edge_marginals<S: Scalar>(m: &Marginals<S>, r: S) -> Result<Vec<S>> {
    if !(r > S::zero() && r <= S::one()) {
        return Err(Error::InvalidSchedule(format!("r = {r} outside (0, 1]")));
    }
    let moved = swapped_distribution(&m.edge)?;
    Ok(m.edge
        .iter()
        .zip(moved)
        .map(|(&p, q)| (S::one() - r) * p + r * q)
        .collect())
}

pub fn terminal_marginals<S: Scalar>(m: &Marginals<S>, r: S) -> Result<TerminalMarginals<S>> {
    Ok(TerminalMarginals {
        node: terminal_node_marginals(m)?,
        edge: terminal_edge_marginals(m, r)?,
    })
}

fn swapped_distribution<S: Scalar>(p: &[S]) -> Result<Vec<S>> {
    require_nondegenerate(p)?;
    let odds: Vec<S> = p.iter().map(|&x| x / (S::one() - x)).collect();
    let total: S = odds.iter().copied().sum();
    Ok(p.iter()
        .zip(&odds)
        .map(|(&pi, &oi)| pi * (total - oi))
        .collect())
}

/// Draws an index from an unnormalised weight vector. Zero-weight indices are
/// never returned.
pub fn sample_categorical<S: Scalar, R: Rng + ?Sized>(weights: &[S], rng: &mut R) -> usize {
    let total: f64 = weights.iter().map(|w| w.as_f64()).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, w) in weights.iter().enumerate() {
        let w = w.as_f64();
        if w <= 0.0 {
            continue;
        }
        if u < w {
            return i;
        }
        u -= w;
        last = Some(i);
    }
    last.expect("distribution has positive mass")
}

/// Where the edge budget is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeScope {
    /// Pairs among the selected nodes only.
    #[default]
    Induced,
    /// Any pair of the graph, independently of the node selection.
    WholeGraph,
}

/// Picks `nodes` distinct nodes uniformly, then `edges` distinct pairs
/// uniformly from the scope's candidate pool.
pub fn select_slots<R: Rng + ?Sized>(
    n: usize,
    nodes: usize,
    edges: usize,
    scope: EdgeScope,
    rng: &mut R,
) -> Result<SelectionMask> {
    if nodes > n {
        return Err(Error::BudgetExceedsPool {
            budget: nodes,
            pool: n,
        });
    }
    let picked: Vec<usize> = rand::seq::index::sample(rng, n, nodes).into_vec();
    let pool: Vec<(usize, usize)> = match scope {
        EdgeScope::Induced => induced_pairs(&picked),
        EdgeScope::WholeGraph => all_pairs(n).collect(),
    };
    if edges > pool.len() {
        return Err(Error::BudgetExceedsPool {
            budget: edges,
            pool: pool.len(),
        });
    }
    let chosen = rand::seq::index::sample(rng, pool.len(), edges)
        .into_iter()
        .map(|k| pool[k])
        .collect();
    match scope {
        EdgeScope::Induced => SelectionMask::new(picked, chosen),
        EdgeScope::WholeGraph => SelectionMask::unconstrained(picked, chosen),
    }
}

/// Resamples every masked slot of `g0` from its transition row, in mask order.
pub fn corrupt<S: Scalar, R: Rng + ?Sized>(
    g0: &Graph,
    mask: &SelectionMask,
    q: &TransitionMatrices<S>,
    rng: &mut R,
) -> Result<Graph> {
    let n = g0.n();
    let mut g = g0.clone();
    for &u in mask.nodes() {
        if u >= n {
            return Err(Error::IndexOutOfRange { index: u, len: n });
        }
        let from = g0.node(u);
        if from >= q.qx.size {
            return Err(Error::ClassOutOfRange {
                class: from,
                count: q.qx.size,
            });
        }
        g.set_node(u, sample_categorical(q.qx.row(from), rng));
    }
    for &(i, j) in mask.edges() {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, len: n });
        }
        let from = g0.edge(i, j);
        if from >= q.qe.size {
            return Err(Error::ClassOutOfRange {
                class: from,
                count: q.qe.size,
            });
        }
        g.set_edge(i, j, sample_categorical(q.qe.row(from), rng));
    }
    Ok(g)
}

/// One-shot corruption of `g0` to level `t` with edges from induced pairs.
pub fn forward_noise<S: Scalar, R: Rng + ?Sized>(
    g0: &Graph,
    t: usize,
    params: &ScheduleParams<S>,
    q: &TransitionMatrices<S>,
    rng: &mut R,
) -> Result<(Graph, SelectionMask)> {
    forward_noise_scoped(g0, t, params, q, EdgeScope::Induced, rng)
}

pub fn forward_noise_scoped<S: Scalar, R: Rng + ?Sized>(
    g0: &Graph,
    t: usize,
    params: &ScheduleParams<S>,
    q: &TransitionMatrices<S>,
    scope: EdgeScope,
    rng: &mut R,
) -> Result<(Graph, SelectionMask)> {
    if g0.n() != params.n() {
        return Err(Error::SizeMismatch {
            expected: params.n(),
            found: g0.n(),
        });
    }
    let budget = step_budget(t, params)?;
    let mask = select_slots(g0.n(), budget.n_nodes, budget.n_edges, scope, rng)?;
    let g = corrupt(g0, &mask, q, rng)?;
    Ok((g, mask))
}

/// Samples a graph whose node and upper-triangle edge classes are i.i.d.
/// from the given distributions; the lower triangle mirrors the upper.
pub fn sample_independent<S: Scalar, R: Rng + ?Sized>(
    n: usize,
    node: &[S],
    edge: &[S],
    no_edge: usize,
    rng: &mut R,
) -> Graph {
    let nodes = (0..n).map(|_| sample_categorical(node, rng)).collect();
    let mut g = Graph::empty(nodes, no_edge);
    for (i, j) in all_pairs(n) {
        g.set_edge(i, j, sample_categorical(edge, rng));
    }
    g
}
