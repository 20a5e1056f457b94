//! Ring perception and mining of the compressible carbon-ring dictionary.

use std::collections::BTreeMap;

use dmol_core::Graph;
use serde::{Deserialize, Serialize};

use crate::error::{ChemError, Result};
use crate::vocab::{bond_order, AtomVocab};

pub const MIN_RING: usize = 3;
pub const MAX_RING: usize = 8;
pub const RINGS_FORMAT: &str = "dmol-rings-v1";

/// A ring as atom indices in cyclic order.
pub type Cycle = Vec<usize>;

/// Every simple cycle of length 3..=8, each listed once, starting at its
/// smallest atom with the smaller of the two neighbours second.
pub fn simple_cycles(g: &Graph) -> Vec<Cycle> {
    fn extend(
        g: &Graph,
        start: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Cycle>,
    ) {
        let last = *path.last().expect("non-empty path");
        for (v, _) in g.neighbors(last) {
            if v == start && path.len() >= MIN_RING && path[1] < last {
                out.push(path.clone());
            } else if v > start && !on_path[v] && path.len() < MAX_RING {
                on_path[v] = true;
                path.push(v);
                extend(g, start, path, on_path, out);
                path.pop();
                on_path[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; g.n()];
    for s in 0..g.n() {
        on_path[s] = true;
        extend(g, s, &mut vec![s], &mut on_path, &mut out);
        on_path[s] = false;
    }
    out
}

fn components(g: &Graph) -> usize {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for (v, _) in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Smallest set of smallest rings: shortest cycles (up to length 8) added
/// greedily while independent over GF(2) in edge space.
pub fn sssr(g: &Graph) -> Vec<Cycle> {
    let edges = g.edge_list();
    if edges.is_empty() {
        return Vec::new();
    }
    let rank = edges.len() + components(g) - g.n();
    if rank == 0 {
        return Vec::new();
    }
    let index: BTreeMap<(usize, usize), usize> = edges
        .iter()
        .enumerate()
        .map(|(k, e)| ((e.0, e.1), k))
        .collect();
    let words = edges.len().div_ceil(64);
    let bits = |c: &Cycle| {
        let mut b = vec![0u64; words];
        for k in 0..c.len() {
            let (u, v) = (c[k], c[(k + 1) % c.len()]);
            let e = index[&(u.min(v), u.max(v))];
            b[e / 64] |= 1 << (e % 64);
        }
        b
    };
    let mut cycles = simple_cycles(g);
    cycles.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    // reduced basis keyed by pivot bit
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for c in cycles {
        let mut v = bits(&c);
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                v.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
            }
        }
        let Some(pivot) = (0..edges.len()).find(|&e| v[e / 64] >> (e % 64) & 1 == 1) else {
            continue;
        };
        for (_, row) in basis.iter_mut() {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                row.iter_mut().zip(&v).for_each(|(a, b)| *a ^= b);
            }
        }
        basis.push((pivot, v));
        chosen.push(c);
        if chosen.len() == rank {
            break;
        }
    }
    chosen
}

/// Ring identity up to rotation and reflection. `bond_sequence[i]` joins
/// atoms `i` and `i + 1` (cyclically).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RingSignature {
    pub size: usize,
    pub atom_sequence: Vec<usize>,
    pub bond_sequence: Vec<usize>,
}

impl RingSignature {
    /// Lexicographically smallest interleaved (atom, bond, atom, ...) reading.
    pub fn canonical(atoms: &[usize], bonds: &[usize]) -> Self {
        let k = atoms.len();
        assert_eq!(k, bonds.len(), "one bond per ring atom");
        let mut best: Option<(Vec<usize>, Vec<usize>, Vec<usize>)> = None;
        for start in 0..k {
            for forward in [true, false] {
                let (a, b): (Vec<usize>, Vec<usize>) = (0..k)
                    .map(|i| {
                        if forward {
                            (atoms[(start + i) % k], bonds[(start + i) % k])
                        } else {
                            // walking backwards, the bond after atom s-i is the one before it
                            let at = (start + k - i) % k;
                            (atoms[at], bonds[(at + k - 1) % k])
                        }
                    })
                    .unzip();
                let key: Vec<usize> = a.iter().zip(&b).flat_map(|(x, y)| [*x, *y]).collect();
                if best.as_ref().is_none_or(|(k0, _, _)| key < *k0) {
                    best = Some((key, a, b));
                }
            }
        }
        let (_, atom_sequence, bond_sequence) = best.expect("non-empty ring");
        Self {
            size: k,
            atom_sequence,
            bond_sequence,
        }
    }

    pub fn of_cycle(g: &Graph, cycle: &[usize]) -> Self {
        let k = cycle.len();
        let atoms: Vec<usize> = cycle.iter().map(|&u| g.node(u)).collect();
        let bonds: Vec<usize> = (0..k)
            .map(|i| g.edge(cycle[i], cycle[(i + 1) % k]))
            .collect();
        Self::canonical(&atoms, &bonds)
    }

    /// Valence left on each ring atom after its two ring bonds.
    pub fn spare_valences(&self, vocab: &AtomVocab) -> Option<Vec<u32>> {
        (0..self.size)
            .map(|i| {
                let used = bond_order(self.bond_sequence[i])
                    + bond_order(self.bond_sequence[(i + self.size - 1) % self.size]);
                vocab
                    .max_valence(self.atom_sequence[i])
                    .map(|m| m.saturating_sub(used))
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(MIN_RING..=MAX_RING).contains(&self.size)
            || self.atom_sequence.len() != self.size
            || self.bond_sequence.len() != self.size
        {
            return Err(ChemError::Format(format!(
                "malformed ring signature {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibilityConfig {
    /// Largest spare valence a ring carbon may keep after its ring bonds.
    pub max_spare: u32,
}

impl Default for EligibilityConfig {
    fn default() -> Self {
        Self { max_spare: 1 }
    }
}

/// All-carbon, with every ring atom limited to single external bonds.
pub fn is_eligible(sig: &RingSignature, vocab: &AtomVocab, config: &EligibilityConfig) -> bool {
    let Some(carbon) = vocab.carbon() else {
        return false;
    };
    sig.atom_sequence.iter().all(|&a| a == carbon)
        && sig
            .spare_valences(vocab)
            .is_some_and(|s| s.iter().all(|&x| x <= config.max_spare))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingEntry {
    pub signature: RingSignature,
    pub supernode_class: usize,
    /// Occurrences in the mining corpus.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDictionary {
    pub format: String,
    /// Atom classes `0..base_node_classes`; supernodes follow.
    pub base_node_classes: usize,
    pub entries: Vec<RingEntry>,
}

impl RingDictionary {
    pub fn new(base_node_classes: usize, ranked: Vec<(RingSignature, usize)>) -> Result<Self> {
        let entries = ranked
            .into_iter()
            .enumerate()
            .map(|(rank, (signature, count))| RingEntry {
                signature,
                supernode_class: base_node_classes + rank,
                count,
            })
            .collect();
        let d = Self {
            format: RINGS_FORMAT.into(),
            base_node_classes,
            entries,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Node classes of the extended vocabulary.
    pub fn node_classes(&self) -> usize {
        self.base_node_classes + self.entries.len()
    }

    pub fn entry_for_class(&self, class: usize) -> Option<&RingEntry> {
        class
            .checked_sub(self.base_node_classes)
            .and_then(|k| self.entries.get(k))
    }

    pub fn rank_of(&self, sig: &RingSignature) -> Option<usize> {
        self.entries.iter().position(|e| &e.signature == sig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != RINGS_FORMAT {
            return Err(ChemError::Format(self.format.clone()));
        }
        for (rank, e) in self.entries.iter().enumerate() {
            e.signature.validate()?;
            if e.supernode_class != self.base_node_classes + rank {
                return Err(ChemError::Format(format!(
                    "entry {rank} has supernode class {}",
                    e.supernode_class
                )));
            }
            if self.entries[..rank]
                .iter()
                .any(|f| f.signature == e.signature)
            {
                return Err(ChemError::Format(format!(
                    "duplicate ring signature at entry {rank}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dictionary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }
}

/// The `k` most frequent eligible ring types, counted once per ring instance.
/// Ties break on the signature so the result is deterministic.
pub fn mine_rings(
    dataset: &[Graph],
    k: usize,
    vocab: &AtomVocab,
    config: &EligibilityConfig,
) -> Result<RingDictionary> {
    let mut counts: BTreeMap<RingSignature, usize> = BTreeMap::new();
    for g in dataset {
        for c in sssr(g) {
            let sig = RingSignature::of_cycle(g, &c);
            if is_eligible(&sig, vocab, config) {
                *counts.entry(sig).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(RingSignature, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if ranked.len() < k {
        log::warn!(
            "only {} eligible ring types found, {k} requested",
            ranked.len()
        );
    }
    ranked.truncate(k);
    RingDictionary::new(vocab.len(), ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;
    use crate::vocab::{DOUBLE, SINGLE};

    fn mol(s: &str) -> Graph {
        parse_smiles(s, &AtomVocab::default()).unwrap()
    }

    #[test]
    fn cycle_enumeration() {
        assert!(simple_cycles(&mol("CCCC")).is_empty());
        assert_eq!(simple_cycles(&mol("C1CCCCC1")).len(), 1);
        // bicyclo[2.2.0]hexane: two 4-rings and the 6-ring around them
        let bicyclic = mol("C1CC2CCC12");
        assert_eq!(simple_cycles(&bicyclic).len(), 3);
        let rings = sssr(&bicyclic);
        assert_eq!(rings.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4]);
    }

    #[test]
    fn cubane_has_five_sssr_rings() {
        let cubane = mol("C12C3C4C1C5C2C3C45");
        let rings = sssr(&cubane);
        assert_eq!(rings.len(), 5);
        assert!(rings.iter().all(|r| r.len() == 4));
    }

    #[test]
    fn signature_ignores_rotation_and_direction() {
        let a = RingSignature::canonical(&[0, 0, 1, 0], &[DOUBLE, SINGLE, SINGLE, SINGLE]);
        let b = RingSignature::canonical(&[1, 0, 0, 0], &[SINGLE, SINGLE, DOUBLE, SINGLE]);
        assert_eq!(a, b);
        let g1 = mol("C1=CC=CC=C1");
        let g2 = mol("C=1C=CC=CC=1");
        assert_eq!(
            RingSignature::of_cycle(&g1, &sssr(&g1)[0]),
            RingSignature::of_cycle(&g2, &sssr(&g2)[0])
        );
    }

    #[test]
    fn acyclic_corpus_mines_nothing() {
        let v = AtomVocab::default();
        let d = mine_rings(
            &[mol("CCO"), mol("CC(C)N")],
            3,
            &v,
            &EligibilityConfig::default(),
        )
        .unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn cyclohexane_needs_spare_two() {
        let v = AtomVocab::default();
        let corpus = vec![mol("C1CCCCC1"), mol("CC1CCCCC1")];
        assert!(mine_rings(&corpus, 3, &v, &EligibilityConfig::default())
            .unwrap()
            .is_empty());
        let d = mine_rings(&corpus, 3, &v, &EligibilityConfig { max_spare: 2 }).unwrap();
        assert_eq!(d.len(), 1);
        let e = &d.entries[0];
        assert_eq!((e.signature.size, e.count, e.supernode_class), (6, 2, 4));
        assert!(e.signature.bond_sequence.iter().all(|&b| b == SINGLE));
    }

    #[test]
    fn ranking_and_json() {
        let v = AtomVocab::default();
        let corpus = vec![
            mol("C1=CC=CC=C1"),
            mol("OC1=CC=CC=C1"),
            mol("C1=CC=C1"),
            mol("C1CCO1"),
        ];
        let d = mine_rings(&corpus, 5, &v, &EligibilityConfig::default()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!((d.entries[0].signature.size, d.entries[0].count), (6, 2));
        assert_eq!(d.entries[1].signature.size, 4);
        assert_eq!(RingDictionary::from_json(&d.to_json()).unwrap(), d);
        let mut bad = d.clone();
        bad.entries[1].supernode_class = 9;
        assert!(RingDictionary::from_json(&bad.to_json()).is_err());
    }
}
