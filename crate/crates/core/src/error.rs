use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected} nodes, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("class {class} out of range for vocabulary of {count} classes")]
    ClassOutOfRange { class: usize, count: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid selection mask: {0}")]
    InvalidMask(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),
    #[error("step {t} outside [0, {total}]")]
    StepOutOfRange { t: usize, total: usize },
    #[error("invalid schedule parameters: {0}")]
    InvalidSchedule(String),
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("degenerate marginal: class {class} has probability 1")]
    DegenerateMarginal { class: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("edge budget {budget} exceeds the {pool} candidate pairs")]
    BudgetExceedsPool { budget: usize, pool: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged at step {step}: loss {loss}")]
    Diverged { step: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
