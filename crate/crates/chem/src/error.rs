use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChemError {
    #[error("SMILES parse error at position {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("graph has no atoms")]
    Empty,
    #[error("no molecules to evaluate")]
    NoSamples,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("class {class} is not in the {what} vocabulary")]
    UnknownClass { what: &'static str, class: usize },
    #[error("more than 9 ring closures open at once")]
    TooManyOpenRings,
    #[error("invalid vocabulary: {0}")]
    Vocab(String),
    #[error("supernode {node} has {attachments} attachments but only {sites} free ring sites")]
    OverAttached {
        node: usize,
        attachments: usize,
        sites: usize,
    },
    #[error("supernode {node} carries a non-single external bond")]
    NonSingleAttachment { node: usize },
    #[error("unsupported ring dictionary format {0:?}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] dmol_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = ChemError> = std::result::Result<T, E>;
