use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmol_chem::codec::{compress, decompress};
use dmol_chem::rings::{mine_rings, EligibilityConfig, RingDictionary};
use dmol_chem::{
    load_dataset, parse_smiles, write_smiles, AtomVocab, Dataset, MetricReport, ValidityConfig,
};
use dmol_core::analysis::{
    change_probability, compat_forward, dmol_drift, efficiency_ratio, hamming_curves,
    stationarity_check, DigressCompatConfig,
};
use dmol_core::graph::{graph_from_json, graph_to_json, hamming_nodes};
use dmol_core::noise::{
    build_transitions, estimate_marginals, sample_independent, EdgeScope, Marginals,
};
use dmol_core::schedule::{alpha, ScheduleConfig, ScheduleParams};
use dmol_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::pipeline::{fit, generate, score, stream_rng, stream_seed, Checkpoint, Stream};

#[derive(Debug, Parser)]
#[command(
    name = "dmol",
    version,
    about = "Schedule-driven discrete graph diffusion for molecules"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a denoiser and write a checkpoint.
    Train(TrainArgs),
    /// Generate molecules from a checkpoint.
    Sample(SampleArgs),
    /// Validity, uniqueness and novelty of a molecule file.
    Evaluate(EvaluateArgs),
    /// Mine the ring dictionary from a corpus.
    MineRings(MineArgs),
    /// Replace dictionary rings by supernodes (JSON graph lines out).
    Compress(CodecArgs),
    /// Expand supernodes in JSON graph lines back to molecules.
    Decompress(CodecArgs),
    /// Closed-form and Monte-Carlo comparisons with the DiGress process.
    Analyze(AnalyzeArgs),
    /// Train, sample and evaluate under each loss/edge-scope combination.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value = "dmol-checkpoint.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Enable ring compression.
    #[arg(long)]
    pub codec: bool,
    /// Validate the configuration and dataset, then stop.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Smiles,
    Json,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub num_samples: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_enum, default_value = "smiles")]
    pub format: OutputFormat,
    #[arg(long, default_value = "samples.smi")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Generated molecules: SMILES or JSON graph lines.
    #[arg(long)]
    pub samples: PathBuf,
    /// Training corpus for novelty.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_spare: Option<u32>,
    #[arg(long, default_value = "rings.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    /// Molecules (compress) or JSON graph lines (decompress).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(subcommand)]
    pub kind: AnalyzeKind,
    /// CSV destination; a JSON summary goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct MarginalArgs {
    /// Node marginal, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.72, 0.12, 0.15, 0.01])]
    pub node: Vec<f64>,
    /// Edge marginal (no-edge first), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.9, 0.07, 0.02, 0.01])]
    pub edge: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeKind {
    /// Step-count ratio 1 / Σ p(1 − p).
    Efficiency {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.72, 0.12, 0.15, 0.01])]
        node: Vec<f64>,
    },
    /// Expected Hamming distance per step for both processes.
    Hamming {
        #[command(flatten)]
        m: MarginalArgs,
        #[arg(long, default_value_t = 9)]
        n: usize,
    },
    /// Redraw chains at the marginal, contrasted with budgeted drift.
    Stationarity {
        #[command(flatten)]
        m: MarginalArgs,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 9)]
        n: usize,
    },
    /// Changed-node counts of the DiGress-compatible forward process.
    Compat {
        #[command(flatten)]
        m: MarginalArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        fixed_steps: usize,
    },
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub num_samples: Option<usize>,
    #[arg(long, default_value = "ablation.csv")]
    pub out: PathBuf,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn dataset_path(flag: &Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.data.dataset.clone())
        .ok_or_else(|| {
            CliError::Usage("a dataset is required (--dataset or [data] dataset)".into())
        })
}

fn load_corpus(path: &Path, vocab: &AtomVocab) -> Result<Dataset> {
    let d = load_dataset(path, vocab)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if !d.skipped.is_empty() {
        log::warn!("{}: skipped {} lines", path.display(), d.skipped.len());
        for s in d.skipped.iter().take(10) {
            log::info!("line {}: {}", s.line, s.reason);
        }
    }
    Ok(d)
}

/// Every non-comment line becomes one entry; unparseable lines become the
/// empty graph, which is never valid.
pub fn read_molecules(text: &str, vocab: &AtomVocab) -> Vec<Graph> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let parsed = if l.starts_with('{') {
                graph_from_json(l, dmol_chem::vocab::NO_BOND).ok()
            } else {
                parse_smiles(l.split_whitespace().next().unwrap_or_default(), vocab).ok()
            };
            parsed.unwrap_or_else(|| Graph::empty(Vec::new(), dmol_chem::vocab::NO_BOND))
        })
        .collect()
}

fn hardware_label() -> String {
    format!(
        "{} {} with {} worker threads",
        std::env::consts::OS,
        std::env::consts::ARCH,
        rayon::current_num_threads()
    )
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.command {
        Command::Train(a) => cmd_train(cfg, a),
        Command::Sample(a) => cmd_sample(cfg, a),
        Command::Evaluate(a) => cmd_evaluate(cfg, a),
        Command::MineRings(a) => cmd_mine_rings(cfg, a),
        Command::Compress(a) => cmd_compress(cfg, a),
        Command::Decompress(a) => cmd_decompress(cfg, a),
        Command::Analyze(a) => cmd_analyze(cfg, a),
        Command::Ablate(a) => cmd_ablate(cfg, a),
    }
}

fn cmd_train(mut cfg: RunConfig, a: TrainArgs) -> Result<()> {
    if let Some(s) = a.steps {
        cfg.denoiser.steps = s;
    }
    cfg.codec.enabled |= a.codec;
    let path = dataset_path(&a.dataset, &cfg)?;
    cfg.data.dataset = Some(path.clone());
    cfg.validate()?;
    let vocab = cfg.atom_vocab()?;
    let data = load_corpus(&path, &vocab)?;
    if a.dry_run {
        println!(
            "configuration ok; {} molecules ({} lines skipped)",
            data.graphs.len(),
            data.skipped.len()
        );
        return Ok(());
    }
    let (ckpt, report) = fit(&data.graphs, &cfg)?;
    ckpt.save(&a.out)?;
    let mut csv = String::from("step,train_loss,val_loss,val_cross_entropy\n");
    for p in &report.trace {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            p.step, p.train_loss, p.val_loss, p.val_cross_entropy
        );
    }
    write_file(&a.out.with_extension("trace.csv"), &csv)?;
    if let Some(p) = report.last() {
        println!(
            "trained {} steps; validation loss {:.4}",
            p.step, p.val_loss
        );
    }
    println!("checkpoint written to {}", a.out.display());
    Ok(())
}

fn cmd_sample(cfg: RunConfig, a: SampleArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let n = a.num_samples.unwrap_or(cfg.sampling.num_samples);
    let batch = a.batch_size.unwrap_or(cfg.sampling.batch_size);
    if batch == 0 {
        return Err(CliError::Usage("--batch-size must be positive".into()));
    }
    let samples = generate(&ckpt, n, batch, cfg.seed)?;
    let mut text = String::new();
    let mut unwritable = 0;
    for g in &samples.graphs {
        match a.format {
            OutputFormat::Json => text.push_str(&graph_to_json(g)),
            OutputFormat::Smiles => match write_smiles(g, &ckpt.vocab) {
                Ok(s) => text.push_str(&s),
                Err(_) => {
                    // disconnected or otherwise unwritable samples keep their slot
                    unwritable += 1;
                    text.push_str(&graph_to_json(g));
                }
            },
        }
        text.push('\n');
    }
    write_file(&a.out, &text)?;
    println!(
        "{} samples written to {}",
        samples.graphs.len(),
        a.out.display()
    );
    println!(
        "decode errors: {}; emitted as JSON graphs: {unwritable}",
        samples.decode_errors
    );
    println!("timing on {} (informational only):", hardware_label());
    for (i, t) in samples.batch_times.iter().enumerate() {
        println!("  batch {i}: {:.3} s", t.as_secs_f64());
    }
    Ok(())
}

pub fn evaluate_text(text: &str, training: &[Graph], vocab: &AtomVocab) -> Result<MetricReport> {
    let generated = read_molecules(text, vocab);
    if generated.is_empty() {
        return Err(CliError::Usage("no molecules to evaluate".into()));
    }
    let hashes = dmol_chem::metrics::hash_set(training);
    Ok(dmol_chem::evaluate(
        &generated,
        &hashes,
        vocab,
        &ValidityConfig::default(),
    )?)
}

fn cmd_evaluate(cfg: RunConfig, a: EvaluateArgs) -> Result<()> {
    let vocab = cfg.atom_vocab()?;
    let text = read_file(&a.samples)?;
    let training = match a.dataset.or(cfg.data.dataset.clone()) {
        Some(p) => load_corpus(&p, &vocab)?.graphs,
        None => Vec::new(),
    };
    let report = evaluate_text(&text, &training, &vocab)?;
    println!("{report}");
    if let Some(out) = a.out {
        write_file(&out, &json(&report))?;
    }
    Ok(())
}

fn cmd_mine_rings(cfg: RunConfig, a: MineArgs) -> Result<()> {
    let vocab = cfg.atom_vocab()?;
    let data = load_corpus(&dataset_path(&a.dataset, &cfg)?, &vocab)?;
    let k = a.k.unwrap_or(cfg.codec.k_rings);
    let elig = EligibilityConfig {
        max_spare: a.max_spare.unwrap_or(cfg.codec.max_spare),
    };
    let dict = mine_rings(&data.graphs, k, &vocab, &elig)?;
    if dict.len() < k {
        println!(
            "warning: {} eligible ring types found, {k} requested",
            dict.len()
        );
    }
    write_file(&a.out, &dict.to_json())?;
    for e in &dict.entries {
        println!(
            "class {}: {}-ring, {} occurrences",
            e.supernode_class, e.signature.size, e.count
        );
    }
    Ok(())
}

fn cmd_compress(cfg: RunConfig, a: CodecArgs) -> Result<()> {
    let vocab = cfg.atom_vocab()?;
    let dict = RingDictionary::from_json(&read_file(&a.rings)?)?;
    let data = load_corpus(&a.input, &vocab)?;
    let mut text = String::new();
    let (mut before, mut after, mut ambiguous) = (0, 0, 0);
    for g in &data.graphs {
        let c = compress(g, &dict, &vocab)?;
        before += g.n();
        after += c.graph.n();
        ambiguous += c.ambiguous;
        text.push_str(&graph_to_json(&c.graph));
        text.push('\n');
    }
    write_file(&a.out, &text)?;
    println!(
        "{} molecules, {before} -> {after} nodes; {ambiguous} rings left expanded",
        data.graphs.len()
    );
    Ok(())
}

fn cmd_decompress(cfg: RunConfig, a: CodecArgs) -> Result<()> {
    let vocab = cfg.atom_vocab()?;
    let dict = RingDictionary::from_json(&read_file(&a.rings)?)?;
    let mut text = String::new();
    let mut errors = 0;
    for (i, line) in read_file(&a.input)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let g = graph_from_json(line, dmol_chem::vocab::NO_BOND)
            .map_err(|e| CliError::Data(format!("line {}: {e}", i + 1)))?;
        match decompress(&g, &dict, &vocab) {
            Ok(h) => {
                let s = write_smiles(&h, &vocab).unwrap_or_else(|_| graph_to_json(&h));
                text.push_str(&s);
                text.push('\n');
            }
            Err(e) => {
                log::warn!("line {}: {e}", i + 1);
                errors += 1;
            }
        }
    }
    write_file(&a.out, &text)?;
    println!("decode errors: {errors}");
    Ok(())
}

fn marginals(m: &MarginalArgs) -> Result<Marginals<f64>> {
    Marginals::new(m.node.clone(), m.edge.clone())
        .map_err(|e| CliError::Usage(format!("[analysis] {e}")))
}

/// Mean changed-node count of the compatible process against `n·β̄·Σp(1−p)`.
pub fn compat_rows(
    m: &Marginals<f64>,
    n: usize,
    sched: &ScheduleConfig<f64>,
    fixed_steps: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, f64, f64, f64)>> {
    let q = build_transitions(m)?;
    let compat = DigressCompatConfig::from_marginals(m, sched.r, fixed_steps)?;
    let params = sched.for_nodes(n)?;
    let fixed = ScheduleParams::with_total_steps(sched.r, sched.c, n, fixed_steps)?;
    let s = change_probability(&m.node);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for t in 0..=fixed_steps {
        let beta = 1.0 - alpha(t, &fixed)?;
        let xs: Vec<f64> = (0..trials)
            .map(|_| {
                let g0 = sample_independent(n, &m.node, &m.edge, 0, &mut rng);
                let (g, _) = compat_forward(&g0, t, &params, &compat, &q, &mut rng)?;
                Ok(hamming_nodes(&g0, &g)? as f64)
            })
            .collect::<Result<_>>()?;
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        rows.push((t, n as f64 * beta * s, mean, (var / k).sqrt()));
    }
    Ok(rows)
}

fn cmd_analyze(cfg: RunConfig, a: AnalyzeArgs) -> Result<()> {
    let seed = stream_seed(cfg.seed, Stream::Analysis);
    let sched = cfg.schedule()?;
    let (csv, summary) = match a.kind {
        AnalyzeKind::Efficiency { node } => {
            let ratio =
                efficiency_ratio(&node).map_err(|e| CliError::Usage(format!("[analysis] {e}")))?;
            let s = change_probability(&node);
            (
                format!("change_probability,efficiency_ratio\n{s},{ratio}\n"),
                serde_json::json!({ "change_probability": s, "efficiency_ratio": ratio }),
            )
        }
        AnalyzeKind::Hamming { m, n } => {
            let marg = marginals(&m)?;
            let q = build_transitions(&marg)?;
            let params = sched.for_nodes(n)?;
            let curves = hamming_curves(&marg, &params, &q, m.trials, seed)?;
            let mut csv = String::from(
                "t,beta_bar,dmol_nodes,dmol_nodes_se,digress_nodes,digress_nodes_se,dmol_edges,digress_edges,node_ratio,node_ratio_se,raw_edge_ratio,corrected_edge_ratio\n",
            );
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            for r in &curves.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.t,
                    r.beta_bar,
                    r.dmol_nodes.mean,
                    r.dmol_nodes.std_error,
                    r.digress_nodes.mean,
                    r.digress_nodes.std_error,
                    r.dmol_edges.mean,
                    r.digress_edges.mean,
                    opt(r.node_ratio.map(|e| e.mean)),
                    opt(r.node_ratio.map(|e| e.std_error)),
                    opt(r.raw_edge_ratio),
                    opt(r.corrected_edge_ratio),
                );
            }
            let summary = serde_json::json!({
                "n": n,
                "trials": curves.trials,
                "node_change_probability": curves.node_change_probability,
                "edge_change_probability": curves.edge_change_probability,
            });
            (csv, summary)
        }
        AnalyzeKind::Stationarity { m, steps, n } => {
            let marg = marginals(&m)?;
            let digress = stationarity_check(&marg.node, steps, sched.c, m.trials, seed)?;
            let q = build_transitions(&marg)?;
            let drift = dmol_drift(&marg, &sched.for_nodes(n)?, &q, m.trials, seed ^ 1)?;
            let mut csv = String::from("process,step,deviation\n");
            for (name, r) in [("digress", &digress), ("dmol", &drift)] {
                for (t, d) in r.deviations.iter().enumerate() {
                    let _ = writeln!(csv, "{name},{t},{d}");
                }
            }
            let summary = serde_json::json!({
                "digress_max_deviation": digress.max_deviation,
                "digress_std_error": digress.std_error,
                "dmol_max_deviation": drift.max_deviation,
            });
            (csv, summary)
        }
        AnalyzeKind::Compat { m, n, fixed_steps } => {
            let marg = marginals(&m)?;
            let rows = compat_rows(&marg, n, &sched, fixed_steps, m.trials, seed)?;
            let mut csv = String::from("t,expected,mean,std_error\n");
            let mut worst: f64 = 0.0;
            for &(t, e, mean, se) in &rows {
                let _ = writeln!(csv, "{t},{e},{mean},{se}");
                if se > 0.0 {
                    worst = worst.max((mean - e).abs() / se);
                }
            }
            (
                csv,
                serde_json::json!({ "max_z": worst, "steps": rows.len() }),
            )
        }
    };
    match &a.out {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    println!("{}", json(&summary));
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub mse_loss: bool,
    pub edge_scope: EdgeScope,
    /// Share of forward-noise edge masks confined to the selected nodes.
    pub induced_mask_share: f64,
    pub report: MetricReport,
}

/// Fraction of forward-noise edge masks that stay inside the induced pairs.
pub fn induced_mask_share(
    graphs: &[Graph],
    cfg: &RunConfig,
    scope: EdgeScope,
    draws: usize,
) -> Result<f64> {
    let vocab = cfg.atom_vocab()?;
    let m = estimate_marginals::<f64>(graphs, &vocab.class_vocab())?;
    let q = build_transitions(&m)?;
    let sched = cfg.schedule()?;
    let mut rng = stream_rng(cfg.seed, Stream::Analysis);
    let mut induced = 0;
    for _ in 0..draws {
        let g = &graphs[rng.random_range(0..graphs.len())];
        let p = sched.for_nodes(g.n())?;
        let t = rng.random_range(0..=p.total_steps());
        let (_, mask) = dmol_core::noise::forward_noise_scoped(g, t, &p, &q, scope, &mut rng)?;
        induced += usize::from(mask.is_induced());
    }
    Ok(induced as f64 / draws as f64)
}

pub fn ablate(
    graphs: &[Graph],
    cfg: &RunConfig,
    combos: &[(bool, EdgeScope)],
) -> Result<Vec<AblationRow>> {
    let vocab = cfg.atom_vocab()?;
    combos
        .iter()
        .map(|&(mse_loss, edge_scope)| {
            let mut c = cfg.clone();
            c.loss.mse_loss = mse_loss;
            c.ablation.edge_scope = edge_scope;
            let (ckpt, _) = fit(graphs, &c)?;
            let samples = generate(&ckpt, c.sampling.num_samples, c.sampling.batch_size, c.seed)?;
            Ok(AblationRow {
                mse_loss,
                edge_scope,
                induced_mask_share: induced_mask_share(graphs, &c, edge_scope, 500)?,
                report: score(&samples, graphs, &vocab)?,
            })
        })
        .collect()
}

pub const ABLATION_GRID: [(bool, EdgeScope); 4] = [
    (true, EdgeScope::Induced),
    (false, EdgeScope::Induced),
    (true, EdgeScope::WholeGraph),
    (false, EdgeScope::WholeGraph),
];

fn cmd_ablate(mut cfg: RunConfig, a: AblateArgs) -> Result<()> {
    if let Some(s) = a.steps {
        cfg.denoiser.steps = s;
    }
    if let Some(n) = a.num_samples {
        cfg.sampling.num_samples = n;
    }
    let vocab = cfg.atom_vocab()?;
    let data = load_corpus(&dataset_path(&a.dataset, &cfg)?, &vocab)?;
    let rows = ablate(&data.graphs, &cfg, &ABLATION_GRID)?;
    let mut csv =
        String::from("mse_loss,edge_scope,induced_mask_share,validity,uniqueness,novelty,vu,vun\n");
    println!(
        "{:<9} {:<12} {:>8} {:>8} {:>8} {:>8}",
        "mse_loss", "edges", "local", "V", "V.U.", "V.U.N."
    );
    for r in &rows {
        let scope = match r.edge_scope {
            EdgeScope::Induced => "induced",
            EdgeScope::WholeGraph => "whole-graph",
        };
        let m = &r.report;
        let _ = writeln!(
            csv,
            "{},{scope},{},{},{},{},{},{}",
            r.mse_loss, r.induced_mask_share, m.validity, m.uniqueness, m.novelty, m.vu, m.vun
        );
        println!(
            "{:<9} {:<12} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
            r.mse_loss, scope, r.induced_mask_share, m.validity, m.vu, m.vun
        );
    }
    write_file(&a.out, &csv)?;
    Ok(())
}
