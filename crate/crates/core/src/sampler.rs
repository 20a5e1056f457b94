//! Reverse-time generation: terminal initialisation, then repeated
//! predict / sample / re-corrupt down to step zero.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoiser::{Denoiser, DenoiserInput};
use crate::error::{Error, Result};
use crate::graph::{all_pairs, ClassVocab, Graph, SelectionMask};
use crate::loss::Prediction;
use crate::noise::{
    check_distribution, forward_noise_scoped, sample_categorical, sample_independent, EdgeScope,
    TerminalMarginals, TransitionMatrices,
};
use crate::scalar::Scalar;
use crate::schedule::{ScheduleConfig, ScheduleParams};

/// Empirical distribution of graph sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCountDistribution {
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl NodeCountDistribution {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution(
                "node-count distribution is empty".into(),
            ));
        }
        if entries.iter().any(|&(n, _)| n == 0) {
            return Err(Error::InvalidDistribution(
                "node counts must be at least 1".into(),
            ));
        }
        let (sizes, probs): (Vec<usize>, Vec<f64>) = entries.into_iter().unzip();
        check_distribution(&probs, "node-count distribution")?;
        Ok(Self { sizes, probs })
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![(n, 1.0)])
    }

    pub fn from_dataset(dataset: &[Graph]) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut counts = std::collections::BTreeMap::new();
        for g in dataset {
            *counts.entry(g.n()).or_insert(0usize) += 1;
        }
        let total = dataset.len() as f64;
        Self::new(
            counts
                .into_iter()
                .map(|(n, c)| (n, c as f64 / total))
                .collect(),
        )
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sizes.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn max_nodes(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sizes[sample_categorical(&self.probs, rng)]
    }
}

/// Fixed model-side inputs shared by every reverse step.
#[derive(Debug, Clone, Copy)]
pub struct SamplerContext<'a, S> {
    pub q: &'a TransitionMatrices<S>,
    pub terminal: &'a TerminalMarginals<S>,
    pub vocab: ClassVocab,
    pub schedule: ScheduleConfig<S>,
    pub n_max: usize,
    pub edge_scope: EdgeScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub node_counts: NodeCountDistribution,
    pub num_samples: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// Graph at step `t` drawn from the terminal marginals.
pub fn sample_terminal<S: Scalar, R: Rng + ?Sized>(
    n: usize,
    tm: &TerminalMarginals<S>,
    no_edge: usize,
    rng: &mut R,
) -> Graph {
    sample_independent(n, &tm.node, &tm.edge, no_edge, rng)
}

/// Draws a clean-graph guess from a prediction; each unordered pair is
/// sampled once from its `[i, j]` distribution.
pub fn sample_prediction<S: Scalar, R: Rng + ?Sized>(
    pred: &Prediction<S>,
    no_edge: usize,
    rng: &mut R,
) -> Graph {
    let n = pred.n();
    let px = pred.node_probs();
    let pe = pred.edge_probs();
    let nodes = (0..n)
        .map(|i| sample_categorical(px.row(i).as_slice().expect("rows are contiguous"), rng))
        .collect();
    let mut g = Graph::empty(nodes, no_edge);
    for (i, j) in all_pairs(n) {
        let row = pe.slice(ndarray::s![i, j, ..]);
        g.set_edge(
            i,
            j,
            sample_categorical(row.as_slice().expect("rows are contiguous"), rng),
        );
    }
    g
}

/// Outcome of one reverse step.
#[derive(Debug, Clone)]
pub struct ReverseStep {
    /// The graph at step `t − 1`.
    pub graph: Graph,
    /// The sampled clean-graph guess it was corrupted from.
    pub predicted_clean: Graph,
    pub mask: SelectionMask,
}

/// Predicts from `g_t`, samples a clean guess and corrupts it one-shot to
/// level `t − 1` through the forward-noise code path.
pub fn reverse_step<S: Scalar, D: Denoiser<S> + ?Sized, R: Rng + ?Sized>(
    denoiser: &D,
    g_t: &Graph,
    t: usize,
    params: &ScheduleParams<S>,
    ctx: &SamplerContext<'_, S>,
    rng: &mut R,
) -> Result<ReverseStep> {
    if t == 0 || t > params.total_steps() {
        return Err(Error::StepOutOfRange {
            t,
            total: params.total_steps(),
        });
    }
    let input = DenoiserInput::new(g_t.clone(), t, params, ctx.vocab.edge_classes(), ctx.n_max)?;
    let pred = denoiser.predict(&input)?;
    let predicted_clean = sample_prediction(&pred, ctx.vocab.no_edge(), rng);
    let (graph, mask) =
        forward_noise_scoped(&predicted_clean, t - 1, params, ctx.q, ctx.edge_scope, rng)?;
    Ok(ReverseStep {
        graph,
        predicted_clean,
        mask,
    })
}

/// Full reverse chain for a graph of `n` nodes.
pub fn sample_one<S: Scalar, D: Denoiser<S> + ?Sized, R: Rng + ?Sized>(
    denoiser: &D,
    n: usize,
    ctx: &SamplerContext<'_, S>,
    rng: &mut R,
) -> Result<Graph> {
    let params = ctx.schedule.for_nodes(n)?;
    let mut g = sample_terminal(n, ctx.terminal, ctx.vocab.no_edge(), rng);
    for t in (1..=params.total_steps()).rev() {
        g = reverse_step(denoiser, &g, t, &params, ctx, rng)?.graph;
    }
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub graphs: Vec<Graph>,
    /// Wall time of each batch of `batch_size` samples.
    pub batch_times: Vec<Duration>,
    /// Reverse steps run across all samples (`Σ k·nᵢ`).
    pub total_steps: usize,
}

/// Generates `cfg.num_samples` graphs. Each sample gets its own seed drawn
/// from `cfg.seed`, so output does not depend on the thread count.
pub fn sample<S: Scalar, D: Denoiser<S> + ?Sized>(
    denoiser: &D,
    ctx: &SamplerContext<'_, S>,
    cfg: &SampleConfig,
) -> Result<SampleBatch> {
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let jobs: Vec<(usize, u64)> = (0..cfg.num_samples)
        .map(|_| (cfg.node_counts.sample(&mut master), master.random()))
        .collect();
    let mut graphs = Vec::with_capacity(jobs.len());
    let mut batch_times = Vec::new();
    let mut total_steps = 0;
    for chunk in jobs.chunks(cfg.batch_size) {
        let start = Instant::now();
        let out: Vec<Graph> = chunk
            .par_iter()
            .map(|&(n, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                sample_one(denoiser, n, ctx, &mut rng)
            })
            .collect::<Result<_>>()?;
        batch_times.push(start.elapsed());
        total_steps += chunk
            .iter()
            .map(|&(n, _)| ctx.schedule.k * n)
            .sum::<usize>();
        graphs.extend(out);
    }
    Ok(SampleBatch {
        graphs,
        batch_times,
        total_steps,
    })
}
