//! Structural inputs for the denoiser: per-node bond-class degrees and cycle
//! participation, plus per-graph conditioning scalars.
//!
//! All node features are permutation equivariant, so they preserve the
//! equivariance of any equivariant network that consumes them.

use ndarray::{Array1, Array2};

use crate::graph::Graph;
use crate::scalar::Scalar;
use crate::schedule::StepBudget;

/// Cycle lengths counted per node.
pub const CYCLE_LENGTHS: std::ops::RangeInclusive<usize> = 3..=6;
pub const GLOBAL_FEATURES: usize = 4;

pub fn node_feature_dim(edge_classes: usize) -> usize {
    (edge_classes - 1) + CYCLE_LENGTHS.count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Features<S> {
    /// `n × node_feature_dim` matrix.
    pub node: Array2<S>,
    /// `[n / n_max, t / T, R_x, R_e]`.
    pub global: Array1<S>,
}

/// Number of simple cycles of each length in [`CYCLE_LENGTHS`] passing
/// through each node, on the bond-presence graph.
pub fn cycle_counts(g: &Graph) -> Vec<[usize; 4]> {
    let n = g.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| g.neighbors(i).map(|(j, _)| j).collect())
        .collect();
    let mut counts = vec![[0usize; 4]; n];
    let max_len = *CYCLE_LENGTHS.end();
    let mut path = Vec::with_capacity(max_len);
    let mut on_path = vec![false; n];
    // each cycle is rooted at its smallest node and walked in the direction
    // where the second node is smaller than the last
    for start in 0..n {
        path.push(start);
        on_path[start] = true;
        extend_cycles(start, &adj, &mut path, &mut on_path, &mut counts, max_len);
        on_path[start] = false;
        path.pop();
    }
    counts
}

fn extend_cycles(
    start: usize,
    adj: &[Vec<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    counts: &mut [[usize; 4]],
    max_len: usize,
) {
    let last = *path.last().expect("path starts at the root");
    for &next in &adj[last] {
        if next == start && path.len() >= 3 && path[1] < last {
            for &u in path.iter() {
                counts[u][path.len() - 3] += 1;
            }
            continue;
        }
        if next <= start || on_path[next] || path.len() == max_len {
            continue;
        }
        path.push(next);
        on_path[next] = true;
        extend_cycles(start, adj, path, on_path, counts, max_len);
        on_path[next] = false;
        path.pop();
    }
}

/// Builds node and global features for a noisy graph at `budget.t` of `total_steps`.
pub fn featurize<S: Scalar>(
    g: &Graph,
    edge_classes: usize,
    budget: &StepBudget<S>,
    total_steps: usize,
    n_max: usize,
) -> Features<S> {
    let n = g.n();
    let bond_classes: Vec<usize> = (0..edge_classes).filter(|&c| c != g.no_edge()).collect();
    let dim = node_feature_dim(edge_classes);
    let mut node = Array2::zeros((n, dim));
    let cycles = cycle_counts(g);
    for i in 0..n {
        for (_, c) in g.neighbors(i) {
            if let Some(slot) = bond_classes.iter().position(|&b| b == c) {
                node[[i, slot]] += S::one();
            }
        }
        for (k, &count) in cycles[i].iter().enumerate() {
            node[[i, bond_classes.len() + k]] = S::from_count(count);
        }
    }
    let global = Array1::from(vec![
        S::from_count(n) / S::from_count(n_max.max(1)),
        S::from_count(budget.t) / S::from_count(total_steps.max(1)),
        budget.rx,
        budget.re,
    ]);
    Features { node, global }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_graph, ClassVocab};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn budget() -> StepBudget<f64> {
        StepBudget {
            t: 3,
            alpha: 0.5,
            n_nodes: 2,
            n_edges: 1,
            rx: 0.25,
            re: 0.1,
        }
    }

    #[test]
    fn edgeless_graph_has_zero_structure() {
        let g = Graph::empty(vec![0; 5], 0);
        let f = featurize(&g, 4, &budget(), 6, 10);
        assert_eq!(f.node.dim(), (5, 7));
        assert!(f.node.iter().all(|&x| x == 0.0));
        assert_eq!(f.global.to_vec(), vec![0.5, 0.5, 0.25, 0.1]);
    }

    #[test]
    fn triangle_has_one_three_cycle_per_node() {
        let g = Graph::from_edges(vec![0; 3], &[(0, 1, 1), (1, 2, 1), (0, 2, 2)], 0).unwrap();
        assert_eq!(cycle_counts(&g), vec![[1, 0, 0, 0]; 3]);
        let f = featurize(&g, 3, &budget(), 6, 3);
        // degree by bond class: node 0 has one class-1 and one class-2 bond
        assert_eq!(f.node.row(0).to_vec(), vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn complete_graph_cycle_counts() {
        // K5: cycles through a fixed vertex of length k number C(4,k-1)(k-1)!/2
        let mut g = Graph::empty(vec![0; 5], 0);
        for (i, j) in crate::graph::all_pairs(5) {
            g.set_edge(i, j, 1);
        }
        assert_eq!(cycle_counts(&g), vec![[6, 12, 12, 0]; 5]);
    }

    /// Exhaustive oracle: every ordered tuple of distinct nodes that closes
    /// into a cycle, divided by the 2k rotations and reflections.
    fn brute_force_counts(g: &Graph) -> Vec<[usize; 4]> {
        let n = g.n();
        let mut counts = vec![[0usize; 4]; n];
        for k in 3..=6 {
            let mut tuple = Vec::new();
            let mut raw = vec![0usize; n];
            enumerate(g, k, &mut tuple, &mut raw);
            for u in 0..n {
                // each cycle through u appears 2k times, u in the tuple once each time
                counts[u][k - 3] = raw[u] / (2 * k);
            }
        }
        counts
    }

    fn enumerate(g: &Graph, k: usize, tuple: &mut Vec<usize>, raw: &mut [usize]) {
        if tuple.len() == k {
            if g.has_edge(tuple[k - 1], tuple[0]) {
                for &u in tuple.iter() {
                    raw[u] += 1;
                }
            }
            return;
        }
        for v in 0..g.n() {
            if tuple.contains(&v) {
                continue;
            }
            if let Some(&last) = tuple.last() {
                if !g.has_edge(last, v) {
                    continue;
                }
            }
            tuple.push(v);
            enumerate(g, k, tuple, raw);
            tuple.pop();
        }
    }

    #[test]
    fn cycle_counts_match_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vocab = ClassVocab::new(2, 3, 0).unwrap();
        for density in [0.2, 0.35, 0.5] {
            for _ in 0..5 {
                let g = random_graph(8, &vocab, density, &mut rng);
                assert_eq!(cycle_counts(&g), brute_force_counts(&g));
            }
        }
    }
}
