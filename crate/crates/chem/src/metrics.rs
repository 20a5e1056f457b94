//! Validity, uniqueness and novelty of generated molecules.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use dmol_core::Graph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::canonical_hash;
use crate::error::{ChemError, Result};
use crate::validity::{check_validity, ValidityConfig};
use crate::vocab::AtomVocab;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub total: usize,
    pub valid: usize,
    /// Valid ignoring connectivity.
    pub valid_component_tolerant: usize,
    /// Distinct canonical hashes among valid molecules.
    pub unique: usize,
    /// Distinct valid hashes absent from the training set.
    pub novel: usize,
    pub validity: f64,
    pub uniqueness: f64,
    pub novelty: f64,
    pub vu: f64,
    pub vun: f64,
    pub uniqueness_undefined: bool,
    pub novelty_undefined: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Uniqueness is taken among valid molecules and novelty among valid unique
/// ones; an empty denominator reports 0 and raises the matching flag.
pub fn evaluate(
    generated: &[Graph],
    training_hashes: &HashSet<String>,
    vocab: &AtomVocab,
    config: &ValidityConfig,
) -> Result<MetricReport> {
    if generated.is_empty() {
        return Err(ChemError::NoSamples);
    }
    let checked: Vec<(bool, bool, Option<String>)> = generated
        .par_iter()
        .map(|g| {
            let v = check_validity(g, vocab, config);
            (
                v.valid,
                v.component_tolerant(),
                v.valid.then(|| canonical_hash(g)),
            )
        })
        .collect();
    let valid = checked.iter().filter(|c| c.0).count();
    let tolerant = checked.iter().filter(|c| c.1).count();
    let distinct: BTreeSet<&String> = checked.iter().filter_map(|c| c.2.as_ref()).collect();
    let novel = distinct
        .iter()
        .filter(|h| !training_hashes.contains(**h))
        .count();

    let (validity, _) = ratio(valid, generated.len());
    let (uniqueness, uniqueness_undefined) = ratio(distinct.len(), valid);
    let (novelty, novelty_undefined) = ratio(novel, distinct.len());
    let vu = validity * uniqueness;
    Ok(MetricReport {
        total: generated.len(),
        valid,
        valid_component_tolerant: tolerant,
        unique: distinct.len(),
        novel,
        validity,
        uniqueness,
        novelty,
        vu,
        vun: vu * novelty,
        uniqueness_undefined,
        novelty_undefined,
    })
}

pub fn hash_set(graphs: &[Graph]) -> HashSet<String> {
    graphs.par_iter().map(canonical_hash).collect()
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |undefined: bool| if undefined { " (undefined)" } else { "" };
        writeln!(f, "metric      value    count")?;
        writeln!(
            f,
            "validity    {:.4}   {}/{}",
            self.validity, self.valid, self.total
        )?;
        writeln!(
            f,
            "uniqueness  {:.4}   {}/{}{}",
            self.uniqueness,
            self.unique,
            self.valid,
            flag(self.uniqueness_undefined)
        )?;
        writeln!(
            f,
            "novelty     {:.4}   {}/{}{}",
            self.novelty,
            self.novel,
            self.unique,
            flag(self.novelty_undefined)
        )?;
        writeln!(f, "V.U.        {:.4}", self.vu)?;
        write!(f, "V.U.N.      {:.4}", self.vun)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    #[test]
    fn empty_input_is_an_error() {
        let r = evaluate(
            &[],
            &HashSet::new(),
            &AtomVocab::default(),
            &ValidityConfig::default(),
        );
        assert!(matches!(r, Err(ChemError::NoSamples)));
    }

    #[test]
    fn table_lists_counts() {
        let v = AtomVocab::default();
        let g = parse_smiles("CO", &v).unwrap();
        let r = evaluate(
            &[g.clone(), g],
            &HashSet::new(),
            &v,
            &ValidityConfig::default(),
        )
        .unwrap();
        let text = r.to_string();
        assert!(text.contains("uniqueness  0.5000   1/2"), "{text}");
    }
}
