//! Categorical graphs: node classes plus a symmetric edge-class matrix where
//! "no edge" is itself a class.

use std::collections::BTreeSet;

use ndarray::{Array2, Array3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sizes of the node and edge class alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassVocab {
    node_classes: usize,
    edge_classes: usize,
    no_edge: usize,
}

impl ClassVocab {
    pub fn new(node_classes: usize, edge_classes: usize, no_edge: usize) -> Result<Self> {
        if node_classes < 1 {
            return Err(Error::InvalidVocab(
                "at least one node class is required".into(),
            ));
        }
        if edge_classes < 2 {
            return Err(Error::InvalidVocab(
                "at least two edge classes (no-edge plus one bond) are required".into(),
            ));
        }
        if no_edge >= edge_classes {
            return Err(Error::InvalidVocab(format!(
                "no-edge index {no_edge} outside {edge_classes} edge classes"
            )));
        }
        Ok(Self {
            node_classes,
            edge_classes,
            no_edge,
        })
    }

    pub fn node_classes(&self) -> usize {
        self.node_classes
    }

    pub fn edge_classes(&self) -> usize {
        self.edge_classes
    }

    pub fn no_edge(&self) -> usize {
        self.no_edge
    }

    /// Same edge alphabet with `extra` additional node classes appended.
    pub fn with_extra_nodes(&self, extra: usize) -> Self {
        Self {
            node_classes: self.node_classes + extra,
            ..*self
        }
    }
}

/// Undirected graph over class indices. Both triangles of the edge matrix are
/// kept in lock-step and the diagonal always holds the no-edge class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    nodes: Vec<usize>,
    edges: Vec<usize>,
    no_edge: usize,
}

impl Graph {
    /// Graph with the given node classes and no edges.
    pub fn empty(nodes: Vec<usize>, no_edge: usize) -> Self {
        let n = nodes.len();
        Self {
            nodes,
            edges: vec![no_edge; n * n],
            no_edge,
        }
    }

    /// Builds a graph from `(i, j, class)` triples; unlisted pairs are no-edge.
    pub fn from_edges(
        nodes: Vec<usize>,
        edges: &[(usize, usize, usize)],
        no_edge: usize,
    ) -> Result<Self> {
        let mut g = Self::empty(nodes, no_edge);
        let n = g.n();
        for &(i, j, c) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            g.set_edge(i, j, c);
        }
        Ok(g)
    }

    /// Builds a graph from a dense matrix, checking symmetry and the diagonal.
    pub fn from_matrix(nodes: Vec<usize>, matrix: &[Vec<usize>], no_edge: usize) -> Result<Self> {
        let n = nodes.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Shape(format!("edge matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if matrix[i][i] != no_edge {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            for j in (i + 1)..n {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::InvalidGraph(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        let edges = matrix.iter().flatten().copied().collect();
        Ok(Self {
            nodes,
            edges,
            no_edge,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn no_edge(&self) -> usize {
        self.no_edge
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> usize {
        self.nodes[i]
    }

    pub fn edge(&self, i: usize, j: usize) -> usize {
        self.edges[i * self.n() + j]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge(i, j) != self.no_edge
    }

    pub fn set_node(&mut self, i: usize, class: usize) {
        self.nodes[i] = class;
    }

    /// Sets both orientations of pair `{i, j}`.
    ///
    /// Panics on `i == j`.
    pub fn set_edge(&mut self, i: usize, j: usize, class: usize) {
        assert_ne!(i, j, "self-loops are not representable");
        let n = self.n();
        self.edges[i * n + j] = class;
        self.edges[j * n + i] = class;
    }

    /// Unordered pairs `(i, j)` with `i < j`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        all_pairs(self.n())
    }

    /// Present edges as `(i, j, class)` with `i < j`.
    pub fn edge_list(&self) -> Vec<(usize, usize, usize)> {
        self.pairs()
            .filter(|&(i, j)| self.has_edge(i, j))
            .map(|(i, j)| (i, j, self.edge(i, j)))
            .collect()
    }

    /// Neighbours of `i` together with the connecting edge class.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        self.edges[i * n..(i + 1) * n]
            .iter()
            .enumerate()
            .filter(move |&(_, &c)| c != self.no_edge)
            .map(|(j, &c)| (j, c))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    /// Checks every index against `vocab` and re-checks the structural invariants.
    pub fn validate(&self, vocab: &ClassVocab) -> Result<()> {
        if self.no_edge != vocab.no_edge() {
            return Err(Error::InvalidGraph(format!(
                "graph uses no-edge index {} but vocabulary uses {}",
                self.no_edge,
                vocab.no_edge()
            )));
        }
        if let Some(&c) = self.nodes.iter().find(|&&c| c >= vocab.node_classes()) {
            return Err(Error::ClassOutOfRange {
                class: c,
                count: vocab.node_classes(),
            });
        }
        let n = self.n();
        for i in 0..n {
            if self.edge(i, i) != self.no_edge {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            for j in (i + 1)..n {
                let c = self.edge(i, j);
                if c != self.edge(j, i) {
                    return Err(Error::InvalidGraph(format!("asymmetric entry ({i}, {j})")));
                }
                if c >= vocab.edge_classes() {
                    return Err(Error::ClassOutOfRange {
                        class: c,
                        count: vocab.edge_classes(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (v, _) in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// One-hot node matrix of shape `(n, a)`.
    pub fn node_one_hot<S: Scalar>(&self, node_classes: usize) -> Array2<S> {
        let mut x = Array2::zeros((self.n(), node_classes));
        for (i, &c) in self.nodes.iter().enumerate() {
            x[[i, c]] = S::one();
        }
        x
    }

    /// One-hot edge tensor of shape `(n, n, b)`; the diagonal is all zeros.
    pub fn edge_one_hot<S: Scalar>(&self, edge_classes: usize) -> Array3<S> {
        let n = self.n();
        let mut e = Array3::zeros((n, n, edge_classes));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    e[[i, j, self.edge(i, j)]] = S::one();
                }
            }
        }
        e
    }
}

/// All unordered pairs over `0..n`.
pub fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Bijection on `0..n`. Applying it to a graph moves the class of input node
/// `p(i)` to output node `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {m} outside 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPermutation(format!("image {m} repeated")));
            }
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    /// Uniformly random permutation.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(mapping.as_mut_slice(), rng);
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }
}

/// Relabels `g` so that output node `i` carries input node `p(i)`.
pub fn apply_permutation(g: &Graph, p: &Permutation) -> Result<Graph> {
    let n = g.n();
    if p.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let nodes = (0..n).map(|i| g.node(p.get(i))).collect();
    let mut edges = vec![g.no_edge; n * n];
    for i in 0..n {
        for j in 0..n {
            edges[i * n + j] = g.edge(p.get(i), p.get(j));
        }
    }
    Ok(Graph {
        nodes,
        edges,
        no_edge: g.no_edge,
    })
}

fn check_same_size(g1: &Graph, g2: &Graph) -> Result<()> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            expected: g1.n(),
            found: g2.n(),
        });
    }
    Ok(())
}

/// Number of nodes whose classes differ.
pub fn hamming_nodes(g1: &Graph, g2: &Graph) -> Result<usize> {
    check_same_size(g1, g2)?;
    Ok(g1
        .nodes
        .iter()
        .zip(&g2.nodes)
        .filter(|(a, b)| a != b)
        .count())
}

/// Number of unordered pairs whose edge classes differ.
pub fn hamming_edges(g1: &Graph, g2: &Graph) -> Result<usize> {
    check_same_size(g1, g2)?;
    Ok(g1
        .pairs()
        .filter(|&(i, j)| g1.edge(i, j) != g2.edge(i, j))
        .count())
}

/// The `K_x` / `K_e` indicators: which node and pair slots get replaced.
///
/// Lists keep their draw order so that a relabelled mask replays the same
/// random draws in the same order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SelectionMask {
    nodes: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl SelectionMask {
    /// Mask whose pairs all lie inside the selected nodes.
    pub fn new(nodes: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mask = Self::unconstrained(nodes, edges)?;
        if !mask.is_induced() {
            return Err(Error::InvalidMask(
                "pair endpoint outside the selected nodes".into(),
            ));
        }
        Ok(mask)
    }

    /// Mask whose pairs may touch unselected nodes (whole-graph edge scope).
    pub fn unconstrained(nodes: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &u in &nodes {
            if !seen.insert(u) {
                return Err(Error::InvalidMask(format!("node {u} selected twice")));
            }
        }
        let mut pairs = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidMask(format!(
                    "pair ({i}, {j}) is a self-pair"
                )));
            }
            let pair = (i.min(j), i.max(j));
            if !pairs.insert(pair) {
                return Err(Error::InvalidMask(format!("pair {pair:?} selected twice")));
            }
            normalized.push(pair);
        }
        Ok(Self {
            nodes,
            edges: normalized,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Every node and every pair of an `n`-node graph.
    pub fn full(n: usize) -> Self {
        Self {
            nodes: (0..n).collect(),
            edges: all_pairs(n).collect(),
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Whether every selected pair has both endpoints selected.
    pub fn is_induced(&self) -> bool {
        let nodes: BTreeSet<_> = self.nodes.iter().copied().collect();
        self.edges
            .iter()
            .all(|(i, j)| nodes.contains(i) && nodes.contains(j))
    }

    /// The same selection expressed in the labels of `apply_permutation(g, p)`.
    pub fn relabel(&self, p: &Permutation) -> Self {
        let inv = p.inverse();
        Self {
            nodes: self.nodes.iter().map(|&u| inv.get(u)).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(i, j)| {
                    let (a, b) = (inv.get(i), inv.get(j));
                    (a.min(b), a.max(b))
                })
                .collect(),
        }
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        let max = self
            .nodes
            .iter()
            .copied()
            .chain(self.edges.iter().map(|&(_, j)| j))
            .max();
        match max {
            Some(m) if m >= n => Err(Error::IndexOutOfRange { index: m, len: n }),
            _ => Ok(()),
        }
    }
}

/// Copies `base`, taking node and pair classes from `source` wherever `mask`
/// selects them.
pub fn splice(base: &Graph, source: &Graph, mask: &SelectionMask) -> Result<Graph> {
    check_same_size(base, source)?;
    mask.check_bounds(base.n())?;
    let mut out = base.clone();
    for &u in mask.nodes() {
        out.set_node(u, source.node(u));
    }
    for &(i, j) in mask.edges() {
        out.set_edge(i, j, source.edge(i, j));
    }
    Ok(out)
}

/// All unordered pairs over the given nodes, as `(min, max)` in the order the
/// nodes were listed.
pub fn induced_pairs(nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(pair_count(nodes.len()));
    for (a, &u) in nodes.iter().enumerate() {
        for &v in &nodes[a + 1..] {
            pairs.push((u.min(v), u.max(v)));
        }
    }
    pairs
}

pub const GRAPH_FORMAT: &str = "dmol-graph-v1";

/// Wire form of a graph: present edges only, as `[i, j, class]` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub format: String,
    pub n: usize,
    pub nodes: Vec<usize>,
    pub edges: Vec<[usize; 3]>,
}

impl GraphJson {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            format: GRAPH_FORMAT.to_string(),
            n: g.n(),
            nodes: g.nodes.clone(),
            edges: g
                .edge_list()
                .into_iter()
                .map(|(i, j, c)| [i, j, c])
                .collect(),
        }
    }

    pub fn into_graph(self, no_edge: usize) -> Result<Graph> {
        if self.format != GRAPH_FORMAT {
            return Err(Error::InvalidGraph(format!(
                "unsupported format {:?}",
                self.format
            )));
        }
        if self.nodes.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: self.nodes.len(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut triples = Vec::with_capacity(self.edges.len());
        for [i, j, c] in self.edges {
            if i >= j {
                return Err(Error::InvalidGraph(format!(
                    "edge [{i}, {j}] must have i < j"
                )));
            }
            if c == no_edge {
                return Err(Error::InvalidGraph(format!(
                    "edge [{i}, {j}] lists the no-edge class"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!("edge [{i}, {j}] listed twice")));
            }
            triples.push((i, j, c));
        }
        Graph::from_edges(self.nodes, &triples, no_edge)
    }
}

pub fn graph_to_json(g: &Graph) -> String {
    serde_json::to_string(&GraphJson::from_graph(g)).expect("graph serializes")
}

pub fn graph_from_json(text: &str, no_edge: usize) -> Result<Graph> {
    let wire: GraphJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidGraph(e.to_string()))?;
    wire.into_graph(no_edge)
}

/// Random graph with classes drawn uniformly; handy for tests and benchmarks.
pub fn random_graph<R: Rng + ?Sized>(
    n: usize,
    vocab: &ClassVocab,
    edge_density: f64,
    rng: &mut R,
) -> Graph {
    let nodes = (0..n)
        .map(|_| rng.random_range(0..vocab.node_classes()))
        .collect();
    let mut g = Graph::empty(nodes, vocab.no_edge());
    let bonds: Vec<usize> = (0..vocab.edge_classes())
        .filter(|&c| c != vocab.no_edge())
        .collect();
    for (i, j) in all_pairs(n) {
        if rng.random_bool(edge_density) {
            g.set_edge(i, j, bonds[rng.random_range(0..bonds.len())]);
        }
    }
    g
}
