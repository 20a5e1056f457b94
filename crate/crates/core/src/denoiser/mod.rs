//! Denoising networks: anything that maps a noisy graph plus conditioning to
//! per-node and per-pair class distributions over the clean graph.

mod mpnn;
mod train;

pub use mpnn::{ForwardCache, Mpnn, MpnnConfig, ParamLayout};
pub use train::{
    parameter_gradient, train, Example, TracePoint, TrainConfig, TrainReport, DIVERGENCE_LIMIT,
};

use crate::error::{Error, Result};
use crate::features::{featurize, Features};
use crate::graph::Graph;
use crate::loss::Prediction;
use crate::scalar::Scalar;
use crate::schedule::{step_budget, ScheduleParams};

/// Everything a denoiser sees at one reverse step.
#[derive(Debug, Clone)]
pub struct DenoiserInput<S> {
    pub graph: Graph,
    pub t: usize,
    pub features: Features<S>,
    pub rx: S,
    pub re: S,
}

impl<S: Scalar> DenoiserInput<S> {
    /// Computes budgets, ratios and structural features for `graph` at step `t`.
    pub fn new(
        graph: Graph,
        t: usize,
        params: &ScheduleParams<S>,
        edge_classes: usize,
        n_max: usize,
    ) -> Result<Self> {
        if graph.n() != params.n() {
            return Err(Error::SizeMismatch {
                expected: params.n(),
                found: graph.n(),
            });
        }
        let budget = step_budget(t, params)?;
        let features = featurize(&graph, edge_classes, &budget, params.total_steps(), n_max);
        Ok(Self {
            graph,
            t,
            features,
            rx: budget.rx,
            re: budget.re,
        })
    }
}

pub trait Denoiser<S: Scalar>: Sync {
    fn predict(&self, input: &DenoiserInput<S>) -> Result<Prediction<S>>;
}

/// Test double that always predicts a stored clean graph with certainty.
#[derive(Debug, Clone)]
pub struct OracleDenoiser {
    clean: Graph,
    node_classes: usize,
    edge_classes: usize,
}

impl OracleDenoiser {
    pub fn new(clean: Graph, node_classes: usize, edge_classes: usize) -> Self {
        Self {
            clean,
            node_classes,
            edge_classes,
        }
    }

    pub fn clean(&self) -> &Graph {
        &self.clean
    }
}

impl<S: Scalar> Denoiser<S> for OracleDenoiser {
    fn predict(&self, input: &DenoiserInput<S>) -> Result<Prediction<S>> {
        if input.graph.n() != self.clean.n() {
            return Err(Error::SizeMismatch {
                expected: self.clean.n(),
                found: input.graph.n(),
            });
        }
        Ok(Prediction::one_hot(
            &self.clean,
            self.node_classes,
            self.edge_classes,
        ))
    }
}
