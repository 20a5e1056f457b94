//! Schedule-driven discrete diffusion over categorical graphs.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the precision used by the command-line tools.

pub mod analysis;
pub mod denoiser;
pub mod error;
pub mod features;
pub mod graph;
pub mod loss;
pub mod noise;
pub mod sampler;
pub mod scalar;
pub mod schedule;

pub use error::{Error, Result};
pub use graph::{
    apply_permutation, hamming_edges, hamming_nodes, induced_pairs, splice, ClassVocab, Graph,
    Permutation, SelectionMask,
};
pub use scalar::Scalar;

pub type ScheduleParams64 = schedule::ScheduleParams<f64>;
pub type StepBudget64 = schedule::StepBudget<f64>;
pub type Marginals64 = noise::Marginals<f64>;
pub type TransitionMatrices64 = noise::TransitionMatrices<f64>;
pub type Prediction64 = loss::Prediction<f64>;
pub type Mpnn64 = denoiser::Mpnn<f64>;
pub type ScheduleConfig64 = schedule::ScheduleConfig<f64>;
pub type TerminalMarginals64 = noise::TerminalMarginals<f64>;
pub type LossConfig64 = loss::LossConfig<f64>;
pub type TrainConfig64 = denoiser::TrainConfig<f64>;
pub type DigressCompatConfig64 = analysis::DigressCompatConfig<f64>;
