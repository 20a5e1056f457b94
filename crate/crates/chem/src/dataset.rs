//! Line-oriented corpora: one SMILES or one JSON graph per line.

use std::path::Path;

use dmol_core::graph::graph_from_json;
use dmol_core::sampler::NodeCountDistribution;
use dmol_core::Graph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::smiles::parse_smiles;
use crate::validity::{check_validity, ValidityConfig};
use crate::vocab::{AtomVocab, NO_BOND};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedLine {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub graphs: Vec<Graph>,
    pub skipped: Vec<SkippedLine>,
}

impl Dataset {
    /// `None` when no line parsed.
    pub fn node_counts(&self) -> Option<NodeCountDistribution> {
        NodeCountDistribution::from_dataset(&self.graphs).ok()
    }
}

fn parse_line(text: &str, vocab: &AtomVocab) -> std::result::Result<Graph, String> {
    let g = if text.starts_with('{') {
        let g = graph_from_json(text, NO_BOND).map_err(|e| e.to_string())?;
        g.validate(&vocab.class_vocab())
            .map_err(|e| e.to_string())?;
        g
    } else {
        let token = text.split_whitespace().next().unwrap_or_default();
        parse_smiles(token, vocab).map_err(|e| e.to_string())?
    };
    let v = check_validity(&g, vocab, &ValidityConfig::default());
    if !v.valid {
        return Err(if v.valence_ok {
            "disconnected molecule".into()
        } else {
            format!("valence violated at atom {}", v.issues[0].index)
        });
    }
    Ok(g)
}

/// Parses corpus text. `#` lines and blank lines are ignored; anything that
/// fails to parse or is not a valid molecule is skipped and reported.
pub fn parse_dataset(text: &str, vocab: &AtomVocab) -> Dataset {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let parsed: Vec<(usize, std::result::Result<Graph, String>)> = lines
        .par_iter()
        .map(|&(i, l)| (i, parse_line(l, vocab)))
        .collect();
    let mut graphs = Vec::new();
    let mut skipped = Vec::new();
    for (line, r) in parsed {
        match r {
            Ok(g) => graphs.push(g),
            Err(reason) => skipped.push(SkippedLine { line, reason }),
        }
    }
    Dataset { graphs, skipped }
}

pub fn load_dataset(path: impl AsRef<Path>, vocab: &AtomVocab) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_dataset(&text, vocab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmol_core::graph::graph_to_json;

    #[test]
    fn empty_text() {
        let d = parse_dataset("", &AtomVocab::default());
        assert!(d.graphs.is_empty() && d.skipped.is_empty());
        assert!(d.node_counts().is_none());
    }

    #[test]
    fn mixed_lines() {
        let v = AtomVocab::default();
        let json = graph_to_json(&parse_smiles("CO", &v).unwrap());
        let text = format!("# header\nC\nc1ccccc1\n\nC(=O)(=O)=O\nCC name\n{json}\nC[N+]\n{{bad\n");
        let d = parse_dataset(&text, &v);
        assert_eq!(d.graphs.len(), 3);
        let lines: Vec<usize> = d.skipped.iter().map(|s| s.line).collect();
        assert_eq!(lines, vec![3, 5, 8, 9]);
        let counts: Vec<(usize, f64)> = d.node_counts().unwrap().entries().collect();
        assert_eq!(counts.iter().map(|c| c.0).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn unreadable_file_errors() {
        assert!(load_dataset("/nonexistent/dmol.smi", &AtomVocab::default()).is_err());
    }
}
