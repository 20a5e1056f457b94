//! Library-level train / sample / evaluate flow shared by the commands.

use std::path::Path;
use std::time::Duration;

use dmol_chem::codec::{compress, decompress};
use dmol_chem::rings::{mine_rings, EligibilityConfig, RingDictionary};
use dmol_chem::{AtomVocab, MetricReport, ValidityConfig};
use dmol_core::denoiser::{train, Mpnn, MpnnConfig, TrainReport};
use dmol_core::graph::ClassVocab;
use dmol_core::noise::{
    build_transitions, estimate_marginals, terminal_marginals, EdgeScope, Marginals,
    TransitionMatrices,
};
use dmol_core::sampler::{sample, NodeCountDistribution, SampleConfig, SamplerContext};
use dmol_core::schedule::ScheduleConfig;
use dmol_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const CHECKPOINT_FORMAT: &str = "dmol-ckpt-v1";

/// Independent random streams derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    Train = 2,
    Sample = 3,
    Analysis = 4,
}

/// ChaCha8 keyed by the master seed, on the stream's own word position
/// space, so streams never overlap.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    stream_rng(seed, stream).random()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub vocab: AtomVocab,
    pub rings: Option<RingDictionary>,
    pub marginals: Marginals<f64>,
    pub transitions: TransitionMatrices<f64>,
    pub schedule: ScheduleConfig<f64>,
    pub edge_scope: EdgeScope,
    pub node_counts: NodeCountDistribution,
    pub denoiser: MpnnConfig,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn model(&self) -> Result<Mpnn<f64>> {
        Ok(Mpnn::from_params(self.denoiser, self.params.clone())?)
    }

    /// Graph vocabulary the model works in: atoms, then any supernodes.
    pub fn class_vocab(&self) -> ClassVocab {
        let base = self.vocab.class_vocab();
        match &self.rings {
            Some(d) => base.with_extra_nodes(d.len()),
            None => base,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self =
            serde_json::from_str(text).map_err(|e| CliError::Data(format!("checkpoint: {e}")))?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(CliError::Data(format!(
                "unsupported checkpoint format {:?}",
                c.format
            )));
        }
        if let Some(d) = &c.rings {
            d.validate()?;
        }
        c.model()?;
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }
}

/// Training graphs in the model's vocabulary.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graphs: Vec<Graph>,
    pub rings: Option<RingDictionary>,
    /// Dictionary rings left expanded by the codec's decode check.
    pub ambiguous_rings: usize,
}

pub fn prepare(dataset: &[Graph], vocab: &AtomVocab, cfg: &RunConfig) -> Result<Prepared> {
    if !cfg.codec.enabled {
        return Ok(Prepared {
            graphs: dataset.to_vec(),
            rings: None,
            ambiguous_rings: 0,
        });
    }
    let elig = EligibilityConfig {
        max_spare: cfg.codec.max_spare,
    };
    let dict = mine_rings(dataset, cfg.codec.k_rings, vocab, &elig)?;
    let mut graphs = Vec::with_capacity(dataset.len());
    let mut ambiguous = 0;
    for g in dataset {
        let c = compress(g, &dict, vocab)?;
        ambiguous += c.ambiguous;
        graphs.push(c.graph);
    }
    Ok(Prepared {
        graphs,
        rings: Some(dict),
        ambiguous_rings: ambiguous,
    })
}

/// Estimates marginals, initialises and trains the denoiser.
pub fn fit(dataset: &[Graph], cfg: &RunConfig) -> Result<(Checkpoint, TrainReport)> {
    if dataset.is_empty() {
        return Err(CliError::Data("dataset has no usable molecules".into()));
    }
    let vocab = cfg.atom_vocab()?;
    let prepared = prepare(dataset, &vocab, cfg)?;
    let mut class_vocab = vocab.class_vocab();
    if let Some(d) = &prepared.rings {
        class_vocab = class_vocab.with_extra_nodes(d.len());
    }
    let marginals = estimate_marginals::<f64>(&prepared.graphs, &class_vocab)?;
    let transitions = build_transitions(&marginals).map_err(|e| {
        CliError::Data(format!(
            "corpus marginals cannot drive the noise model: {e}"
        ))
    })?;
    let schedule = cfg.schedule()?;
    let node_counts = NodeCountDistribution::from_dataset(&prepared.graphs)?;
    let denoiser = MpnnConfig {
        node_classes: class_vocab.node_classes(),
        edge_classes: class_vocab.edge_classes(),
        hidden: cfg.denoiser.width,
        layers: cfg.denoiser.layers,
        n_max: node_counts.max_nodes(),
    };
    let mut net = Mpnn::new(denoiser, &mut stream_rng(cfg.seed, Stream::Init))?;
    let report = train(
        &mut net,
        &prepared.graphs,
        &schedule,
        &transitions,
        &cfg.train()?,
        &mut stream_rng(cfg.seed, Stream::Train),
    )?;
    let ckpt = Checkpoint {
        format: CHECKPOINT_FORMAT.into(),
        vocab,
        rings: prepared.rings,
        marginals,
        transitions,
        schedule,
        edge_scope: cfg.ablation.edge_scope,
        node_counts,
        denoiser,
        params: net.params().to_vec(),
    };
    Ok((ckpt, report))
}

#[derive(Debug, Clone)]
pub struct Samples {
    /// Decoded molecules over the atom vocabulary.
    pub graphs: Vec<Graph>,
    /// Samples whose supernodes could not be expanded.
    pub decode_errors: usize,
    pub batch_times: Vec<Duration>,
    pub total_steps: usize,
}

pub fn generate(
    ckpt: &Checkpoint,
    num_samples: usize,
    batch_size: usize,
    seed: u64,
) -> Result<Samples> {
    let net = ckpt.model()?;
    let terminal = terminal_marginals(&ckpt.marginals, ckpt.schedule.r)?;
    let ctx = SamplerContext {
        q: &ckpt.transitions,
        terminal: &terminal,
        vocab: ckpt.class_vocab(),
        schedule: ckpt.schedule,
        n_max: ckpt.denoiser.n_max,
        edge_scope: ckpt.edge_scope,
    };
    let cfg = SampleConfig {
        node_counts: ckpt.node_counts.clone(),
        num_samples,
        batch_size,
        seed: stream_seed(seed, Stream::Sample),
    };
    let batch = sample(&net, &ctx, &cfg)?;
    let mut graphs = Vec::with_capacity(batch.graphs.len());
    let mut decode_errors = 0;
    for g in batch.graphs {
        match &ckpt.rings {
            None => graphs.push(g),
            Some(d) => match decompress(&g, d, &ckpt.vocab) {
                Ok(h) => graphs.push(h),
                Err(e) => {
                    log::debug!("decode failed: {e}");
                    decode_errors += 1;
                }
            },
        }
    }
    Ok(Samples {
        graphs,
        decode_errors,
        batch_times: batch.batch_times,
        total_steps: batch.total_steps,
    })
}

/// Metrics over generated samples; decode failures count as invalid.
pub fn score(samples: &Samples, training: &[Graph], vocab: &AtomVocab) -> Result<MetricReport> {
    let mut all = samples.graphs.clone();
    all.extend(std::iter::repeat_n(
        Graph::empty(Vec::new(), 0),
        samples.decode_errors,
    ));
    let hashes = dmol_chem::metrics::hash_set(training);
    Ok(dmol_chem::evaluate(
        &all,
        &hashes,
        vocab,
        &ValidityConfig::default(),
    )?)
}
