use dmol_core::Graph;
use serde::{Deserialize, Serialize};

use crate::vocab::{bond_order, AtomVocab, BOND_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityConfig {
    pub require_connected: bool,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        Self {
            require_connected: true,
        }
    }
}

/// An atom whose bonds exceed its valence or whose class is unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomIssue {
    pub index: usize,
    pub bond_order_sum: u32,
    /// `None` for classes outside the vocabulary.
    pub max_valence: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validity {
    pub valid: bool,
    pub valence_ok: bool,
    pub connected: bool,
    pub issues: Vec<AtomIssue>,
}

impl Validity {
    /// Validity ignoring connectivity.
    pub fn component_tolerant(&self) -> bool {
        self.valence_ok
    }
}

pub fn bond_order_sum(g: &Graph, i: usize) -> u32 {
    g.neighbors(i).map(|(_, b)| bond_order(b)).sum()
}

/// Valence sanity: non-empty, every atom at or below its maximum valence
/// (missing valence is implicit hydrogen) and, by default, one component.
pub fn check_validity(g: &Graph, vocab: &AtomVocab, config: &ValidityConfig) -> Validity {
    let mut issues = Vec::new();
    for i in 0..g.n() {
        let sum = bond_order_sum(g, i);
        let max = vocab.max_valence(g.node(i));
        let bad_bond = g.neighbors(i).any(|(_, b)| b >= BOND_CLASSES);
        if max.is_none_or(|m| sum > m) || bad_bond {
            issues.push(AtomIssue {
                index: i,
                bond_order_sum: sum,
                max_valence: max,
            });
        }
    }
    let valence_ok = g.n() > 0 && issues.is_empty();
    let connected = g.n() > 0 && g.is_connected();
    Validity {
        valid: valence_ok && (connected || !config.require_connected),
        valence_ok,
        connected,
        issues,
    }
}

pub fn is_valid(g: &Graph, vocab: &AtomVocab) -> bool {
    check_validity(g, vocab, &ValidityConfig::default()).valid
}
