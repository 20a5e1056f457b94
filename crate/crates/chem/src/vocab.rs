use dmol_core::ClassVocab;
use serde::{Deserialize, Serialize};

use crate::error::{ChemError, Result};

/// Edge classes are bond orders: `0` none, `1` single, `2` double, `3` triple.
pub const NO_BOND: usize = 0;
pub const SINGLE: usize = 1;
pub const DOUBLE: usize = 2;
pub const TRIPLE: usize = 3;
pub const BOND_CLASSES: usize = 4;

pub fn bond_order(class: usize) -> u32 {
    class as u32
}

pub fn bond_symbol(class: usize) -> &'static str {
    match class {
        DOUBLE => "=",
        TRIPLE => "#",
        _ => "",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomType {
    pub symbol: String,
    pub max_valence: u32,
}

/// Ordered heavy-atom types; the index is the node class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AtomType>", into = "Vec<AtomType>")]
pub struct AtomVocab {
    atoms: Vec<AtomType>,
}

impl Default for AtomVocab {
    fn default() -> Self {
        Self::new(vec![("C", 4), ("N", 3), ("O", 2), ("F", 1)]).expect("default vocabulary")
    }
}

impl TryFrom<Vec<AtomType>> for AtomVocab {
    type Error = ChemError;

    fn try_from(atoms: Vec<AtomType>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(ChemError::Vocab("no atom types".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            let mut chars = a.symbol.chars();
            let ok = chars.next().is_some_and(|c| c.is_ascii_uppercase())
                && chars.all(|c| c.is_ascii_lowercase());
            if !ok {
                return Err(ChemError::Vocab(format!("bad atom symbol {:?}", a.symbol)));
            }
            if a.max_valence == 0 {
                return Err(ChemError::Vocab(format!("{} has zero valence", a.symbol)));
            }
            if atoms[..i].iter().any(|b| b.symbol == a.symbol) {
                return Err(ChemError::Vocab(format!("duplicate symbol {}", a.symbol)));
            }
        }
        Ok(Self { atoms })
    }
}

impl From<AtomVocab> for Vec<AtomType> {
    fn from(v: AtomVocab) -> Self {
        v.atoms
    }
}

impl AtomVocab {
    pub fn new<S: Into<String>>(atoms: Vec<(S, u32)>) -> Result<Self> {
        atoms
            .into_iter()
            .map(|(s, v)| AtomType {
                symbol: s.into(),
                max_valence: v,
            })
            .collect::<Vec<_>>()
            .try_into()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn symbol(&self, class: usize) -> Option<&str> {
        self.atoms.get(class).map(|a| a.symbol.as_str())
    }

    pub fn max_valence(&self, class: usize) -> Option<u32> {
        self.atoms.get(class).map(|a| a.max_valence)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.symbol == symbol)
    }

    pub fn carbon(&self) -> Option<usize> {
        self.index_of("C")
    }

    /// Longest symbol that prefixes `text`.
    pub(crate) fn match_prefix(&self, text: &str) -> Option<(usize, usize)> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| text.starts_with(&a.symbol))
            .max_by_key(|(_, a)| a.symbol.len())
            .map(|(i, a)| (i, a.symbol.len()))
    }

    /// Graph vocabulary: one node class per atom type, bond orders as edge classes.
    pub fn class_vocab(&self) -> ClassVocab {
        ClassVocab::new(self.len(), BOND_CLASSES, NO_BOND).expect("non-empty vocabulary")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_vocab() {
        let v = AtomVocab::default();
        assert_eq!(v.len(), 4);
        assert_eq!(v.max_valence(v.index_of("N").unwrap()), Some(3));
        assert_eq!(v.carbon(), Some(0));
        assert_eq!(v.class_vocab().edge_classes(), 4);
    }

    #[test]
    fn longest_match_wins() {
        let v = AtomVocab::new(vec![("C", 4), ("Cl", 1)]).unwrap();
        assert_eq!(v.match_prefix("ClC"), Some((1, 2)));
        assert_eq!(v.match_prefix("CC"), Some((0, 1)));
        assert_eq!(v.match_prefix("N"), None);
    }

    #[test]
    fn rejects_bad_vocab() {
        assert!(AtomVocab::new::<&str>(vec![]).is_err());
        assert!(AtomVocab::new(vec![("C", 4), ("C", 3)]).is_err());
        assert!(AtomVocab::new(vec![("c", 4)]).is_err());
        assert!(AtomVocab::new(vec![("C", 0)]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let v = AtomVocab::default();
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<AtomVocab>(&text).unwrap(), v);
        assert!(serde_json::from_str::<AtomVocab>("[]").is_err());
    }
}
