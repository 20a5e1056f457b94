//! Small synthetic corpora for smoke tests and codec checks.

use dmol_core::Graph;
use rand::Rng;

use crate::validity::bond_order_sum;
use crate::vocab::{bond_order, AtomVocab, DOUBLE, NO_BOND, SINGLE, TRIPLE};

fn spare(g: &Graph, vocab: &AtomVocab, i: usize) -> u32 {
    vocab.max_valence(g.node(i)).unwrap_or(0) - bond_order_sum(g, i)
}

fn pick_class<R: Rng + ?Sized>(vocab: &AtomVocab, weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (c, &w) in weights.iter().enumerate() {
        if u < w {
            return c;
        }
        u -= w;
    }
    vocab.len() - 1
}

fn pick_bond<R: Rng + ?Sized>(room: u32, rng: &mut R) -> usize {
    let x: f64 = rng.random();
    match room {
        r if r >= 3 && x < 0.05 => TRIPLE,
        r if r >= 2 && x < 0.2 => DOUBLE,
        _ => SINGLE,
    }
}

/// Class weights over the default vocabulary, roughly QM9-shaped.
pub const DEFAULT_WEIGHTS: [f64; 4] = [0.7, 0.12, 0.14, 0.04];

/// A random connected molecule with `n` heavy atoms over the first
/// `weights.len()` vocabulary classes: a random tree with occasional multiple
/// bonds, plus an occasional ring closure of size 3 to 8.
pub fn random_molecule<R: Rng + ?Sized>(
    n: usize,
    vocab: &AtomVocab,
    weights: &[f64],
    rng: &mut R,
) -> Graph {
    assert!(n >= 1 && weights.len() <= vocab.len());
    let carbon = vocab.carbon().unwrap_or(0);
    let mut g = Graph::empty(vec![carbon], NO_BOND);
    let mut depth = vec![0usize];
    let mut parent = vec![usize::MAX];
    while g.n() < n {
        let open: Vec<usize> = (0..g.n()).filter(|&i| spare(&g, vocab, i) > 0).collect();
        if open.is_empty() {
            break;
        }
        let at = open[rng.random_range(0..open.len())];
        let class = pick_class(vocab, weights, rng);
        let room = spare(&g, vocab, at).min(vocab.max_valence(class).unwrap_or(1));
        let bond = pick_bond(room, rng);
        let mut nodes = g.nodes().to_vec();
        nodes.push(class);
        let mut next = Graph::empty(nodes, NO_BOND);
        for (i, j, b) in g.edge_list() {
            next.set_edge(i, j, b);
        }
        let new = g.n();
        next.set_edge(at, new, bond);
        g = next;
        depth.push(depth[at] + 1);
        parent.push(at);
    }
    if rng.random_bool(0.3) {
        let open: Vec<usize> = (0..g.n()).filter(|&i| spare(&g, vocab, i) > 0).collect();
        let pairs: Vec<(usize, usize)> = open
            .iter()
            .flat_map(|&a| open.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| {
                a < b && !g.has_edge(a, b) && (3..=8).contains(&(cycle_len(&parent, &depth, a, b)))
            })
            .collect();
        if !pairs.is_empty() {
            let (a, b) = pairs[rng.random_range(0..pairs.len())];
            g.set_edge(a, b, SINGLE);
        }
    }
    g
}

/// Length of the cycle closed by joining tree nodes `a` and `b`.
fn cycle_len(parent: &[usize], depth: &[usize], mut a: usize, mut b: usize) -> usize {
    let mut len = 1;
    while a != b {
        if depth[a] >= depth[b] {
            a = parent[a];
        } else {
            b = parent[b];
        }
        len += 1;
    }
    len
}

/// `count` random molecules with sizes uniform in `1..=max_atoms`.
pub fn molecule_corpus<R: Rng + ?Sized>(
    count: usize,
    max_atoms: usize,
    vocab: &AtomVocab,
    rng: &mut R,
) -> Vec<Graph> {
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=max_atoms);
            random_molecule(n, vocab, &DEFAULT_WEIGHTS[..vocab.len().min(4)], rng)
        })
        .collect()
}

/// Kekulé ring of `size` carbons with alternating double bonds, as edges
/// over atoms `offset..offset + size`.
fn kekule_ring(size: usize, offset: usize) -> Vec<(usize, usize, usize)> {
    (0..size)
        .map(|i| {
            let b = if i % 2 == 0 { DOUBLE } else { SINGLE };
            (offset + i, offset + (i + 1) % size, b)
        })
        .collect()
}

/// Molecules built around one alternating carbon ring (4, 6 or 8 atoms)
/// carrying 0 to 2 single-bonded substituents at random ring positions.
/// Substituents are short chains over the first `vocab` classes.
pub fn ring_corpus<R: Rng + ?Sized>(count: usize, vocab: &AtomVocab, rng: &mut R) -> Vec<Graph> {
    let carbon = vocab.carbon().expect("carbon in vocabulary");
    (0..count)
        .map(|_| {
            let size = [4, 6, 8][rng.random_range(0..3)];
            let mut nodes = vec![carbon; size];
            let mut edges = kekule_ring(size, 0);
            let subs = rng.random_range(0..=2);
            let mut sites: Vec<usize> = (0..size).collect();
            for _ in 0..subs {
                let site = sites.swap_remove(rng.random_range(0..sites.len()));
                let len = rng.random_range(1..=2);
                let mut prev = site;
                for k in 0..len {
                    let class = pick_class(vocab, &DEFAULT_WEIGHTS[..vocab.len().min(4)], rng);
                    // a chain atom needs room for its two neighbours
                    let class = if k + 1 < len && vocab.max_valence(class) < Some(2) {
                        carbon
                    } else {
                        class
                    };
                    nodes.push(class);
                    edges.push((prev, nodes.len() - 1, SINGLE));
                    prev = nodes.len() - 1;
                }
            }
            Graph::from_edges(nodes, &edges, NO_BOND).expect("well-formed ring molecule")
        })
        .collect()
}

/// Total bond order, a quick sanity statistic.
pub fn total_bond_order(g: &Graph) -> u32 {
    g.edge_list().iter().map(|e| bond_order(e.2)).sum()
}
