//! Side-by-side comparison with a uniform-rate marginal diffusion: its
//! transition matrices, an emulation mode for the budgeted forward process,
//! and Monte-Carlo checks of the closed-form step-efficiency claims.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    all_pairs, hamming_edges, hamming_nodes, induced_pairs, pair_count, Graph, SelectionMask,
};
use crate::noise::{
    check_distribution, corrupt, forward_noise, sample_categorical, sample_independent, Marginals,
    Matrix, TransitionMatrices,
};
use crate::scalar::Scalar;
use crate::schedule::{alpha, cosine_alpha, edge_budget, node_budget, ScheduleParams};

/// `ᾱ·I + (1 − ᾱ)·1·mᵀ`: keep the class with probability `ᾱ`, otherwise
/// redraw it from `m`.
pub fn digress_transition<S: Scalar>(alpha_bar: S, m: &[S]) -> Result<Matrix<S>> {
    if !(alpha_bar >= S::zero() && alpha_bar <= S::one()) {
        return Err(Error::InvalidSchedule(format!(
            "alpha_bar = {alpha_bar} outside [0, 1]"
        )));
    }
    check_distribution(m, "marginal")?;
    let size = m.len();
    let mut data = vec![S::zero(); size * size];
    for i in 0..size {
        for j in 0..size {
            data[i * size + j] = (S::one() - alpha_bar) * m[j];
        }
        data[i * size + i] += alpha_bar;
    }
    Ok(Matrix { size, data })
}

/// `Σ p_i (1 − p_i)`: probability that a redraw from `p` of a `p`-distributed
/// class changes it.
pub fn change_probability<S: Scalar>(p: &[S]) -> S {
    p.iter().map(|&x| x * (S::one() - x)).sum()
}

/// Step-count advantage `1 / Σ p_i (1 − p_i)` of always-changing transitions
/// over redraw-from-marginal transitions.
pub fn efficiency_ratio<S: Scalar>(p: &[S]) -> Result<S> {
    check_distribution(p, "marginal")?;
    if let Some(class) = p.iter().position(|&x| x >= S::one()) {
        return Err(Error::DegenerateMarginal { class });
    }
    Ok(S::one() / change_probability(p))
}

/// How the real-valued expected counts of the emulation mode become draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Select exactly `⌊x⌋` items.
    Floor,
    /// Select `⌊x⌋` or `⌈x⌉` items so that the expectation is exactly `x`.
    #[default]
    Stochastic,
}

/// Knobs that turn the budgeted forward process into one whose expected
/// per-step change counts match the redraw-from-marginal process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigressCompatConfig<S> {
    /// Replace `T = k·n` with a size-independent step count.
    pub fixed_steps: Option<usize>,
    /// Multiplies the node budget.
    pub node_scale: S,
    /// Multiplies the edge budget.
    pub edge_scale: S,
    /// Draw edges from all pairs instead of pairs among selected nodes.
    pub independent_edges: bool,
    /// Per-class selection weights for nodes.
    pub node_weights: Option<Vec<S>>,
    /// Per-class selection weights for edges.
    pub edge_weights: Option<Vec<S>>,
    pub rounding: Rounding,
}

impl<S: Scalar> DigressCompatConfig<S> {
    /// All knobs off: identical to the plain forward process.
    pub fn neutral() -> Self {
        Self {
            fixed_steps: None,
            node_scale: S::one(),
            edge_scale: S::one(),
            independent_edges: false,
            node_weights: None,
            edge_weights: None,
            rounding: Rounding::Floor,
        }
    }

    /// All five modifications derived from the corpus marginals.
    pub fn from_marginals(m: &Marginals<S>, r: S, fixed_steps: usize) -> Result<Self> {
        if fixed_steps == 0 {
            return Err(Error::Config("fixed step count must be positive".into()));
        }
        let node_scale = change_probability(&m.node);
        let edge_scale = change_probability(&m.edge) / r;
        Ok(Self {
            fixed_steps: Some(fixed_steps),
            node_scale,
            edge_scale,
            independent_edges: true,
            node_weights: Some(m.node.iter().map(|&p| S::one() - p).collect()),
            edge_weights: Some(m.edge.iter().map(|&p| S::one() - p).collect()),
            rounding: Rounding::Stochastic,
        })
    }

    pub fn is_neutral(&self) -> bool {
        self.fixed_steps.is_none()
            && self.node_scale == S::one()
            && self.edge_scale == S::one()
            && !self.independent_edges
            && self.node_weights.is_none()
            && self.edge_weights.is_none()
            && self.rounding == Rounding::Floor
    }

    fn validate(&self) -> Result<()> {
        if self.fixed_steps == Some(0) {
            return Err(Error::Config("fixed step count must be positive".into()));
        }
        for (name, s) in [
            ("node_scale", self.node_scale),
            ("edge_scale", self.edge_scale),
        ] {
            if !(s > S::zero()) || !s.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite")));
            }
        }
        for w in self.node_weights.iter().chain(&self.edge_weights) {
            if w.iter().any(|&x| !(x >= S::zero()) || !x.is_finite()) {
                return Err(Error::Config(
                    "selection weights must be finite and non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Inclusion probabilities proportional to `weights` with total `expected`,
/// capping at 1 and redistributing the excess.
pub fn inclusion_probabilities(weights: &[f64], expected: f64) -> Vec<f64> {
    let mut pi = vec![0.0; weights.len()];
    let mut capped = vec![false; weights.len()];
    let target = expected.min(weights.iter().filter(|&&w| w > 0.0).count() as f64);
    let mut remaining = target;
    loop {
        let free: f64 = weights
            .iter()
            .zip(&capped)
            .filter(|(_, &c)| !c)
            .map(|(&w, _)| w)
            .sum();
        if free <= 0.0 || remaining <= 0.0 {
            break;
        }
        let mut newly_capped = false;
        for i in 0..weights.len() {
            if !capped[i] {
                pi[i] = remaining * weights[i] / free;
                if pi[i] >= 1.0 {
                    pi[i] = 1.0;
                    capped[i] = true;
                    newly_capped = true;
                }
            }
        }
        if !newly_capped {
            break;
        }
        remaining = target - capped.iter().filter(|&&c| c).count() as f64;
        remaining = remaining.max(0.0);
        for i in 0..weights.len() {
            if !capped[i] {
                pi[i] = 0.0;
            }
        }
    }
    pi
}

/// Systematic sampling: each index is selected with exactly its inclusion
/// probability, and the total is `⌊Σπ⌋` or `⌈Σπ⌉`.
fn systematic_sample<R: Rng + ?Sized>(pi: &[f64], rng: &mut R) -> Vec<usize> {
    let u: f64 = rng.random();
    let mut chosen = Vec::new();
    let mut cum = 0.0;
    let mut next = u;
    for (i, &p) in pi.iter().enumerate() {
        cum += p;
        if next < cum {
            chosen.push(i);
            next += 1.0;
        }
    }
    chosen
}

fn expected_count<S: Scalar>(x: S, rounding: Rounding) -> f64 {
    match rounding {
        Rounding::Floor => x.as_f64().floor(),
        Rounding::Stochastic => x.as_f64(),
    }
}

fn clamp_to_pool(expected: f64, pool: usize, what: &str) -> f64 {
    if expected > pool as f64 {
        warn!("{what} budget {expected:.3} exceeds the {pool} available slots; clamping");
        pool as f64
    } else {
        expected
    }
}

fn weights_for<S: Scalar>(
    classes: impl Iterator<Item = usize>,
    w: Option<&Vec<S>>,
) -> Result<Vec<f64>> {
    classes
        .map(|c| match w {
            None => Ok(1.0),
            Some(w) => w.get(c).map(|x| x.as_f64()).ok_or(Error::ClassOutOfRange {
                class: c,
                count: w.len(),
            }),
        })
        .collect()
}

/// Forward corruption under the emulation knobs. With every knob neutral
/// this is exactly [`forward_noise`], draw for draw.
pub fn compat_forward<S: Scalar, R: Rng + ?Sized>(
    g0: &Graph,
    t: usize,
    params: &ScheduleParams<S>,
    compat: &DigressCompatConfig<S>,
    q: &TransitionMatrices<S>,
    rng: &mut R,
) -> Result<(Graph, SelectionMask)> {
    compat.validate()?;
    if compat.is_neutral() {
        return forward_noise(g0, t, params, q, rng);
    }
    let n = g0.n();
    if n != params.n() {
        return Err(Error::SizeMismatch {
            expected: params.n(),
            found: n,
        });
    }
    let params = match compat.fixed_steps {
        Some(steps) => ScheduleParams::with_total_steps(params.r(), params.c(), n, steps)?,
        None => *params,
    };
    let a = alpha(t, &params)?;
    let beta = S::one() - a;

    let node_x = expected_count(beta * S::from_count(n) * compat.node_scale, compat.rounding);
    let node_x = clamp_to_pool(node_x, n, "node");
    let w = weights_for(g0.nodes().iter().copied(), compat.node_weights.as_ref())?;
    let nodes = systematic_sample(&inclusion_probabilities(&w, node_x), rng);

    let pool: Vec<(usize, usize)> = if compat.independent_edges {
        all_pairs(n).collect()
    } else {
        induced_pairs(&nodes)
    };
    let base_pairs = if compat.independent_edges {
        pair_count(n)
    } else {
        pair_count(nodes.len())
    };
    let edge_x = beta * params.r() * S::from_count(base_pairs) * compat.edge_scale;
    let edge_x = clamp_to_pool(expected_count(edge_x, compat.rounding), pool.len(), "edge");
    let w = weights_for(
        pool.iter().map(|&(i, j)| g0.edge(i, j)),
        compat.edge_weights.as_ref(),
    )?;
    let edges = systematic_sample(&inclusion_probabilities(&w, edge_x), rng)
        .into_iter()
        .map(|k| pool[k])
        .collect();

    let mask = if compat.independent_edges {
        SelectionMask::unconstrained(nodes, edges)?
    } else {
        SelectionMask::new(nodes, edges)?
    };
    let g = corrupt(g0, &mask, q, rng)?;
    Ok((g, mask))
}

/// One-shot redraw-from-marginal corruption: each slot keeps its class with
/// probability `ᾱ`, otherwise it is redrawn from the marginal.
pub fn digress_forward<S: Scalar, R: Rng + ?Sized>(
    g0: &Graph,
    alpha_bar: S,
    m: &Marginals<S>,
    rng: &mut R,
) -> Graph {
    let mut g = g0.clone();
    let keep = alpha_bar.as_f64();
    for i in 0..g.n() {
        if rng.random::<f64>() >= keep {
            g.set_node(i, sample_categorical(&m.node, rng));
        }
    }
    for (i, j) in all_pairs(g.n()) {
        if rng.random::<f64>() >= keep {
            g.set_edge(i, j, sample_categorical(&m.edge, rng));
        }
    }
    g
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, trials: usize) -> Self {
        let k = trials as f64;
        let mean = sum / k;
        let var = if trials > 1 {
            ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / k).sqrt(),
        }
    }
}

/// Monte-Carlo Hamming distance from the clean graph per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingRow {
    pub t: usize,
    /// `1 − ᾱ(t)`, shared by both processes.
    pub beta_bar: f64,
    pub dmol_nodes: Estimate,
    pub digress_nodes: Estimate,
    pub dmol_edges: Estimate,
    pub digress_edges: Estimate,
    /// Redraw-process node distance over `n·(1 − ᾱ)`; predicted to be `Σ p(1 − p)`.
    pub node_ratio: Option<Estimate>,
    /// Redraw-process edge distance over the budgeted one.
    pub raw_edge_ratio: Option<f64>,
    /// `raw_edge_ratio` times `C(N(t), 2) / C(n, 2)`.
    pub corrected_edge_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingCurves {
    pub n: usize,
    pub trials: usize,
    pub node_change_probability: f64,
    pub edge_change_probability: f64,
    pub rows: Vec<HammingRow>,
}

fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.random()).collect()
}

/// Expected node and edge Hamming distances of both processes at every step,
/// starting from graphs drawn i.i.d. from the marginals.
pub fn hamming_curves<S: Scalar>(
    m: &Marginals<S>,
    params: &ScheduleParams<S>,
    q: &TransitionMatrices<S>,
    trials: usize,
    seed: u64,
) -> Result<HammingCurves> {
    if trials < 2 {
        return Err(Error::Config("at least two trials are needed".into()));
    }
    let n = params.n();
    let steps = params.total_steps();
    let no_edge = m
        .edge
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite marginal"))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let alphas: Vec<S> = (0..=steps)
        .map(|t| alpha(t, params))
        .collect::<Result<_>>()?;
    // per step: [dmol nodes, digress nodes, dmol edges, digress edges]
    let per_trial: Vec<Vec<[f64; 4]>> = trial_seeds(seed, trials)
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let g0 = sample_independent(n, &m.node, &m.edge, no_edge, &mut rng);
            (0..=steps)
                .map(|t| {
                    let (dm, _) = forward_noise(&g0, t, params, q, &mut rng)?;
                    let dg = digress_forward(&g0, alphas[t], m, &mut rng);
                    Ok([
                        hamming_nodes(&g0, &dm)? as f64,
                        hamming_nodes(&g0, &dg)? as f64,
                        hamming_edges(&g0, &dm)? as f64,
                        hamming_edges(&g0, &dg)? as f64,
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let mut sums = [0.0; 4];
        let mut sq = [0.0; 4];
        let mut ratio_sq = 0.0;
        let beta = 1.0 - alphas[t].as_f64();
        for trial in &per_trial {
            for k in 0..4 {
                sums[k] += trial[t][k];
                sq[k] += trial[t][k] * trial[t][k];
            }
            if beta > 0.0 {
                let r = trial[t][1] / (n as f64 * beta);
                ratio_sq += r * r;
            }
        }
        let est = |k: usize| Estimate::from_sums(sums[k], sq[k], trials);
        let node_ratio = (beta > 0.0)
            .then(|| Estimate::from_sums(sums[1] / (n as f64 * beta), ratio_sq, trials));
        let (dmol_e, dig_e) = (est(2), est(3));
        let raw_edge_ratio = (dmol_e.mean > 0.0).then(|| dig_e.mean / dmol_e.mean);
        let selected = node_budget(t, params)?;
        let corrected_edge_ratio = raw_edge_ratio
            .filter(|_| n > 1)
            .map(|r| r * pair_count(selected) as f64 / pair_count(n) as f64);
        debug_assert_eq!(edge_budget(t, params)? as f64, dmol_e.mean);
        rows.push(HammingRow {
            t,
            beta_bar: beta,
            dmol_nodes: est(0),
            digress_nodes: est(1),
            dmol_edges: dmol_e,
            digress_edges: dig_e,
            node_ratio,
            raw_edge_ratio,
            corrected_edge_ratio,
        });
    }
    Ok(HammingCurves {
        n,
        trials,
        node_change_probability: change_probability(&m.node).as_f64(),
        edge_change_probability: change_probability(&m.edge).as_f64(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub trials: usize,
    pub steps: usize,
    /// Largest `|frequency − m_i|` over steps and classes.
    pub max_deviation: f64,
    /// Largest binomial standard error `sqrt(m_i (1 − m_i) / trials)`.
    pub std_error: f64,
    /// Per step `0..=steps`, the largest class deviation.
    pub deviations: Vec<f64>,
}

fn class_deviation(counts: &[u64], m: &[f64], trials: usize) -> f64 {
    counts
        .iter()
        .zip(m)
        .map(|(&c, &p)| (c as f64 / trials as f64 - p).abs())
        .fold(0.0, f64::max)
}

fn binomial_std_error(m: &[f64], trials: usize) -> f64 {
    m.iter()
        .map(|&p| (p * (1.0 - p) / trials as f64).sqrt())
        .fold(0.0, f64::max)
}

/// Runs single-node redraw chains started from `m` for `steps` steps of a
/// cosine schedule (per-step retention `ᾱ(t) / ᾱ(t − 1)`) and reports how far
/// the class frequencies drift from `m`.
pub fn stationarity_check<S: Scalar>(
    m: &[S],
    steps: usize,
    c: S,
    trials: usize,
    seed: u64,
) -> Result<StationarityReport> {
    check_distribution(m, "marginal")?;
    if steps == 0 || trials == 0 {
        return Err(Error::Config("steps and trials must be positive".into()));
    }
    let bars: Vec<f64> = (0..=steps)
        .map(|t| cosine_alpha(t, steps, c).as_f64())
        .collect();
    let retain: Vec<f64> = (1..=steps).map(|t| bars[t] / bars[t - 1]).collect();
    let a = m.len();
    let counts = trial_seeds(seed, trials)
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut counts = vec![0u64; (steps + 1) * a];
            let mut x = sample_categorical(m, &mut rng);
            counts[x] += 1;
            for (t, &keep) in retain.iter().enumerate() {
                if rng.random::<f64>() >= keep {
                    x = sample_categorical(m, &mut rng);
                }
                counts[(t + 1) * a + x] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; (steps + 1) * a],
            |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                acc
            },
        );
    let m64: Vec<f64> = m.iter().map(|x| x.as_f64()).collect();
    let deviations: Vec<f64> = counts
        .chunks(a)
        .map(|c| class_deviation(c, &m64, trials))
        .collect();
    Ok(StationarityReport {
        trials,
        steps,
        max_deviation: deviations.iter().copied().fold(0.0, f64::max),
        std_error: binomial_std_error(&m64, trials),
        deviations,
    })
}

/// The same frequency harness applied to the budgeted forward process: node
/// class frequencies of graphs drawn from `m` and corrupted to each step.
pub fn dmol_drift<S: Scalar>(
    m: &Marginals<S>,
    params: &ScheduleParams<S>,
    q: &TransitionMatrices<S>,
    trials: usize,
    seed: u64,
) -> Result<StationarityReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let n = params.n();
    let steps = params.total_steps();
    let a = m.node.len();
    let counts = trial_seeds(seed, trials)
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let g0 = sample_independent(n, &m.node, &m.edge, 0, &mut rng);
            let mut counts = vec![0u64; (steps + 1) * a];
            for t in 0..=steps {
                let (g, _) = forward_noise(&g0, t, params, q, &mut rng)?;
                for &x in g.nodes() {
                    counts[t * a + x] += 1;
                }
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(vec![0u64; (steps + 1) * a], |mut acc, c| {
            acc.iter_mut().zip(c).for_each(|(x, y)| *x += y);
            acc
        });
    let m64: Vec<f64> = m.node.iter().map(|x| x.as_f64()).collect();
    let samples = trials * n;
    let deviations: Vec<f64> = counts
        .chunks(a)
        .map(|c| class_deviation(c, &m64, samples))
        .collect();
    Ok(StationarityReport {
        trials: samples,
        steps,
        max_deviation: deviations.iter().copied().fold(0.0, f64::max),
        std_error: binomial_std_error(&m64, samples),
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::build_transitions;

    #[test]
    fn transition_limits() {
        let m = [0.5f64, 0.3, 0.2];
        let id = digress_transition(1.0, &m).unwrap();
        assert_eq!(id.row(1), &[0.0, 1.0, 0.0]);
        let full = digress_transition(0.0, &m).unwrap();
        assert!((0..3).all(|i| full.row(i) == m));
        let half = digress_transition(0.5, &m).unwrap();
        let expected = [0.75, 0.15, 0.10];
        assert!(half
            .row(0)
            .iter()
            .zip(expected)
            .all(|(a, b)| (a - b).abs() < 1e-15));
        for i in 0..3 {
            assert!((half.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert!(digress_transition(1.5, &m).is_err());
    }

    #[test]
    fn efficiency_hand_values() {
        assert!((efficiency_ratio(&[0.5f64, 0.5]).unwrap() - 2.0).abs() < 1e-12);
        assert!((efficiency_ratio(&[0.75f64, 0.25]).unwrap() - 8.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            efficiency_ratio(&[1.0f64, 0.0]),
            Err(Error::DegenerateMarginal { class: 0 })
        ));
    }

    #[test]
    fn inclusion_probabilities_cap_and_sum() {
        let pi = inclusion_probabilities(&[10.0, 1.0, 1.0, 1.0], 2.5);
        assert_eq!(pi[0], 1.0);
        assert!((pi.iter().sum::<f64>() - 2.5).abs() < 1e-12);
        assert!((pi[1] - 0.5).abs() < 1e-12);
        let zero = inclusion_probabilities(&[0.0, 1.0], 1.0);
        assert_eq!(zero, vec![0.0, 1.0]);
    }

    #[test]
    fn systematic_sample_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pi = vec![0.3; 10];
        for _ in 0..100 {
            let k = systematic_sample(&pi, &mut rng).len();
            assert!(k == 3);
        }
    }

    #[test]
    fn neutral_compat_reproduces_forward_noise() {
        let m = Marginals::<f64>::new(vec![0.6, 0.3, 0.1], vec![0.7, 0.2, 0.1]).unwrap();
        let q = build_transitions(&m).unwrap();
        let params = ScheduleParams::new(2, 0.2, 0.008, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g0 = sample_independent(8, &m.node, &m.edge, 0, &mut rng);
        for t in 0..=16 {
            let mut a = ChaCha8Rng::seed_from_u64(t as u64);
            let mut b = ChaCha8Rng::seed_from_u64(t as u64);
            let lhs = compat_forward(&g0, t, &params, &DigressCompatConfig::neutral(), &q, &mut a)
                .unwrap();
            let rhs = forward_noise(&g0, t, &params, &q, &mut b).unwrap();
            assert_eq!(lhs.0, rhs.0);
            assert_eq!(lhs.1, rhs.1);
        }
    }

    #[test]
    fn stationarity_small_run() {
        let r = stationarity_check(&[0.5f64, 0.3, 0.2], 20, 0.008, 20_000, 3).unwrap();
        assert_eq!(r.deviations.len(), 21);
        assert!(r.max_deviation < 5.0 * r.std_error, "{r:?}");
    }
}
