//! Ring compression into supernodes and its deterministic inverse.

use dmol_core::Graph;
use serde::{Deserialize, Serialize};

use crate::canon::canonical_hash;
use crate::error::{ChemError, Result};
use crate::rings::{sssr, Cycle, RingDictionary, RingSignature};
use crate::vocab::{AtomVocab, NO_BOND, SINGLE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupernodeRecord {
    /// Node index in the compressed graph.
    pub node: usize,
    /// Dictionary rank.
    pub entry: usize,
    /// Atoms of the source graph the supernode replaced.
    pub atoms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedGraph {
    pub graph: Graph,
    pub supernodes: Vec<SupernodeRecord>,
    /// Dictionary rings found but left expanded because decoding would not
    /// reproduce the source attachment pattern.
    pub ambiguous: usize,
}

impl CompressedGraph {
    pub fn removed_nodes(&self, dict: &RingDictionary) -> usize {
        self.supernodes
            .iter()
            .map(|s| dict.entries[s.entry].signature.size - 1)
            .sum()
    }
}

struct Candidate {
    rank: usize,
    cycle: Cycle,
}

/// Structural admissibility of one ring instance: no chords, single external
/// bonds only, at most two attachments and no neighbour bonded twice.
fn admissible(g: &Graph, cycle: &[usize]) -> bool {
    let k = cycle.len();
    let in_ring = |v: usize| cycle.contains(&v);
    let mut neighbours = Vec::new();
    for (p, &u) in cycle.iter().enumerate() {
        let prev = cycle[(p + k - 1) % k];
        let next = cycle[(p + 1) % k];
        for (v, b) in g.neighbors(u) {
            if v == prev || v == next {
                continue;
            }
            if in_ring(v) || b != SINGLE {
                return false;
            }
            neighbours.push(v);
        }
    }
    let total = neighbours.len();
    neighbours.sort_unstable();
    neighbours.dedup();
    total <= 2 && neighbours.len() == total
}

fn build(g: &Graph, accepted: &[(usize, &Cycle)], dict: &RingDictionary) -> CompressedGraph {
    let n = g.n();
    // owner[u] = index into `accepted` for ring atoms
    let mut owner = vec![None; n];
    for (k, (_, c)) in accepted.iter().enumerate() {
        for &u in c.iter() {
            owner[u] = Some(k);
        }
    }
    let mut new_index = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    let mut records: Vec<SupernodeRecord> = Vec::new();
    for u in 0..n {
        match owner[u] {
            None => {
                new_index[u] = nodes.len();
                nodes.push(g.node(u));
            }
            Some(k) => {
                let (rank, c) = accepted[k];
                if c.iter().min() == Some(&u) {
                    let idx = nodes.len();
                    nodes.push(dict.entries[rank].supernode_class);
                    let mut atoms = c.clone();
                    atoms.sort_unstable();
                    records.push(SupernodeRecord {
                        node: idx,
                        entry: rank,
                        atoms,
                    });
                    for &a in c.iter() {
                        new_index[a] = idx;
                    }
                }
            }
        }
    }
    let mut out = Graph::empty(nodes, NO_BOND);
    for (i, j, b) in g.edge_list() {
        let (a, c) = (new_index[i], new_index[j]);
        if a != c {
            out.set_edge(a, c, b);
        }
    }
    records.sort_by_key(|r| r.node);
    CompressedGraph {
        graph: out,
        supernodes: records,
        ambiguous: 0,
    }
}

/// Greedily replaces non-overlapping dictionary rings by supernodes, in
/// order of dictionary rank and then smallest atom index. The supernode takes
/// the position of the ring's smallest atom. A ring is only kept compressed
/// if decoding the result reproduces `g` up to isomorphism.
pub fn compress(g: &Graph, dict: &RingDictionary, vocab: &AtomVocab) -> Result<CompressedGraph> {
    let mut candidates: Vec<Candidate> = sssr(g)
        .into_iter()
        .filter_map(|cycle| {
            dict.rank_of(&RingSignature::of_cycle(g, &cycle))
                .map(|rank| Candidate { rank, cycle })
        })
        .collect();
    candidates.sort_by_key(|c| (c.rank, *c.cycle.iter().min().expect("non-empty ring")));

    let target = canonical_hash(g);
    let mut used = vec![false; g.n()];
    let mut accepted: Vec<(usize, &Cycle)> = Vec::new();
    let mut current = build(g, &[], dict);
    let mut ambiguous = 0;
    for cand in &candidates {
        if cand.cycle.iter().any(|&u| used[u]) || !admissible(g, &cand.cycle) {
            continue;
        }
        accepted.push((cand.rank, &cand.cycle));
        let trial = build(g, &accepted, dict);
        let faithful =
            decompress(&trial.graph, dict, vocab).is_ok_and(|d| canonical_hash(&d) == target);
        if faithful {
            cand.cycle.iter().for_each(|&u| used[u] = true);
            current = trial;
        } else {
            accepted.pop();
            ambiguous += 1;
        }
    }
    current.ambiguous = ambiguous;
    Ok(current)
}

/// Ring positions with spare valence in decode order: the first such atom,
/// then the one farthest from it around the ring, then the rest in order.
fn site_order(spare: &[u32]) -> Vec<usize> {
    let k = spare.len();
    let sites: Vec<usize> = (0..k).filter(|&i| spare[i] > 0).collect();
    let Some(&first) = sites.first() else {
        return sites;
    };
    let dist = |i: usize| {
        let d = i.abs_diff(first);
        d.min(k - d)
    };
    let far = sites[1..]
        .iter()
        .copied()
        .max_by_key(|&i| (dist(i), std::cmp::Reverse(i)));
    let mut order = vec![first];
    order.extend(far);
    let rest: Vec<usize> = sites
        .iter()
        .copied()
        .filter(|i| !order.contains(i))
        .collect();
    order.extend(rest);
    order
}

/// Expands every supernode into its ring; attachments (sorted by neighbour
/// index) bind by single bonds to ring sites in decode order.
pub fn decompress(g: &Graph, dict: &RingDictionary, vocab: &AtomVocab) -> Result<Graph> {
    let n = g.n();
    let base = dict.base_node_classes;
    let mut start = vec![0; n];
    let mut nodes = Vec::new();
    let mut ring_edges = Vec::new();
    let mut sites: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        start[u] = nodes.len();
        let class = g.node(u);
        if class < base {
            nodes.push(class);
            continue;
        }
        let entry = dict.entry_for_class(class).ok_or(ChemError::UnknownClass {
            what: "node",
            class,
        })?;
        let sig = &entry.signature;
        let spare = sig.spare_valences(vocab).ok_or_else(|| {
            ChemError::Vocab(format!("ring entry for class {class} uses unknown atoms"))
        })?;
        let s = nodes.len();
        nodes.extend(&sig.atom_sequence);
        for i in 0..sig.size {
            ring_edges.push((s + i, s + (i + 1) % sig.size, sig.bond_sequence[i]));
        }
        let attachments: Vec<(usize, usize)> = g.neighbors(u).collect();
        if attachments.iter().any(|&(_, b)| b != SINGLE) {
            return Err(ChemError::NonSingleAttachment { node: u });
        }
        let order = site_order(&spare);
        if attachments.len() > order.len() {
            return Err(ChemError::OverAttached {
                node: u,
                attachments: attachments.len(),
                sites: order.len(),
            });
        }
        sites[u] = order;
    }
    let is_super = |u: usize| g.node(u) >= base;
    // neighbour rank among u's attachments, sorted by neighbour index
    let slot = |u: usize, v: usize| g.neighbors(u).position(|(w, _)| w == v).expect("adjacent");
    let mut out = Graph::empty(nodes, NO_BOND);
    for (i, j, b) in ring_edges {
        out.set_edge(i, j, b);
    }
    for (i, j, b) in g.edge_list() {
        let a = if is_super(i) {
            start[i] + sites[i][slot(i, j)]
        } else {
            start[i]
        };
        let c = if is_super(j) {
            start[j] + sites[j][slot(j, i)]
        } else {
            start[j]
        };
        out.set_edge(a, c, b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{mine_rings, EligibilityConfig};
    use crate::smiles::parse_smiles;
    use crate::validity::is_valid;

    fn mol(s: &str) -> Graph {
        parse_smiles(s, &AtomVocab::default()).unwrap()
    }

    fn benzene_dict() -> RingDictionary {
        mine_rings(
            &[mol("C1=CC=CC=C1")],
            3,
            &AtomVocab::default(),
            &EligibilityConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn site_order_rule() {
        assert_eq!(site_order(&[1, 1, 1, 1, 1, 1]), vec![0, 3, 1, 2, 4, 5]);
        assert_eq!(site_order(&[0, 1, 1, 0, 1]), vec![1, 4, 2]);
        assert!(site_order(&[0, 0, 0]).is_empty());
    }

    #[test]
    fn ring_free_is_unchanged() {
        let v = AtomVocab::default();
        let g = mol("CC(=O)N");
        let c = compress(&g, &benzene_dict(), &v).unwrap();
        assert_eq!(c.graph, g);
        assert!(c.supernodes.is_empty());
    }

    #[test]
    fn substituted_benzene() {
        let v = AtomVocab::default();
        let d = benzene_dict();
        let g = mol("OC1=CC=CC=C1");
        let c = compress(&g, &d, &v).unwrap();
        assert_eq!(c.graph.n(), g.n() - 5);
        assert_eq!(c.removed_nodes(&d), 5);
        let s = c.supernodes[0].node;
        assert_eq!(c.graph.degree(s), 1);
        assert_eq!(c.graph.node(s), 4);
        let back = decompress(&c.graph, &d, &v).unwrap();
        assert_eq!(canonical_hash(&back), canonical_hash(&g));
    }

    #[test]
    fn bare_and_two_attachment_rings() {
        let v = AtomVocab::default();
        let d = benzene_dict();
        let bare = decompress(&Graph::empty(vec![4], NO_BOND), &d, &v).unwrap();
        assert_eq!(canonical_hash(&bare), canonical_hash(&mol("C1=CC=CC=C1")));
        let two =
            Graph::from_edges(vec![2, 4, 1], &[(0, 1, SINGLE), (1, 2, SINGLE)], NO_BOND).unwrap();
        let g = decompress(&two, &d, &v).unwrap();
        assert!(is_valid(&g, &v));
        assert_eq!(canonical_hash(&g), canonical_hash(&mol("OC1=CC=C(N)C=C1")));
    }

    #[test]
    fn decode_errors() {
        let v = AtomVocab::default();
        let d = benzene_dict();
        let double = Graph::from_edges(vec![4, 2], &[(0, 1, 2)], NO_BOND).unwrap();
        assert!(matches!(
            decompress(&double, &d, &v),
            Err(ChemError::NonSingleAttachment { node: 0 })
        ));
        let crowded = Graph::from_edges(
            vec![4; 8],
            &(1..8).map(|i| (0, i, SINGLE)).collect::<Vec<_>>(),
            NO_BOND,
        )
        .unwrap();
        assert!(matches!(
            decompress(&crowded, &d, &v),
            Err(ChemError::OverAttached {
                attachments: 7,
                sites: 6,
                ..
            })
        ));
        assert!(decompress(&Graph::empty(vec![5], NO_BOND), &d, &v).is_err());
    }

    #[test]
    fn fused_rings_compress_at_most_once() {
        let v = AtomVocab::default();
        let d = mine_rings(
            &[mol("C1CCCCC1")],
            1,
            &v,
            &EligibilityConfig { max_spare: 2 },
        )
        .unwrap();
        let spiro = mol("C1CCC2(CC1)CCCCC2");
        let c = compress(&spiro, &d, &v).unwrap();
        assert!(c.supernodes.len() <= 1);
        let back = decompress(&c.graph, &d, &v).unwrap();
        assert_eq!(canonical_hash(&back), canonical_hash(&spiro));
    }

    #[test]
    fn ortho_pattern_stays_expanded() {
        let v = AtomVocab::default();
        let d = benzene_dict();
        let g = mol("OC1=C(N)C=CC=C1");
        let c = compress(&g, &d, &v).unwrap();
        assert!(c.supernodes.is_empty());
        assert_eq!(c.ambiguous, 1);
        assert_eq!(c.graph, g);
    }

    #[test]
    fn linked_rings() {
        let v = AtomVocab::default();
        let d = benzene_dict();
        let biphenyl = mol("C1=CC=C(C=C1)C2=CC=CC=C2");
        let c = compress(&biphenyl, &d, &v).unwrap();
        assert_eq!(c.supernodes.len(), 2);
        assert_eq!(c.graph.n(), 2);
        let back = decompress(&c.graph, &d, &v).unwrap();
        assert_eq!(canonical_hash(&back), canonical_hash(&biphenyl));
    }
}
