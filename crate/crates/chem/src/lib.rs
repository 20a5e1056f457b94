//! Molecule-side support for dmol: a kekulized SMILES subset, valence
//! checks, canonical hashing, ring compression and generation metrics.

pub mod canon;
pub mod codec;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod rings;
pub mod smiles;
pub mod toy;
pub mod validity;
pub mod vocab;

pub use canon::{canonical_form, canonical_hash};
pub use codec::{compress, decompress, CompressedGraph};
pub use dataset::{load_dataset, parse_dataset, Dataset};
pub use error::{ChemError, Result};
pub use metrics::{evaluate, MetricReport};
pub use rings::{mine_rings, EligibilityConfig, RingDictionary, RingSignature};
pub use smiles::{parse_smiles, write_smiles};
pub use validity::{check_validity, is_valid, Validity, ValidityConfig};
pub use vocab::AtomVocab;
