//! Training objective: node and edge cross-entropy plus squared penalties on
//! the mismatch between predicted and scheduled change counts.

use ndarray::{Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{hamming_edges, hamming_nodes, Graph, Permutation};
use crate::scalar::Scalar;
use crate::schedule::StepBudget;

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Per-node and per-pair class distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<S> {
    node_probs: Array2<S>,
    edge_probs: Array3<S>,
}

impl<S: Scalar> Prediction<S> {
    /// Checks shapes, row sums (within 1e-6) and edge symmetry.
    pub fn new(node_probs: Array2<S>, edge_probs: Array3<S>) -> Result<Self> {
        let n = node_probs.nrows();
        let (e0, e1, _) = edge_probs.dim();
        if e0 != n || e1 != n {
            return Err(Error::Shape(format!(
                "edge probabilities are {e0}x{e1}, expected {n}x{n}"
            )));
        }
        let tol = S::lit(1e-6);
        let row_ok = |row: ndarray::ArrayView1<S>| {
            row.iter().all(|&p| p >= S::zero()) && (row.sum() - S::one()).abs() <= tol
        };
        if !node_probs.rows().into_iter().all(row_ok) {
            return Err(Error::InvalidDistribution(
                "node row is not a distribution".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let row = edge_probs.slice(ndarray::s![i, j, ..]);
                if !row_ok(row) {
                    return Err(Error::InvalidDistribution(format!(
                        "edge row ({i}, {j}) is not a distribution"
                    )));
                }
                if row != edge_probs.slice(ndarray::s![j, i, ..]) {
                    return Err(Error::InvalidDistribution(format!(
                        "edge probabilities at ({i}, {j}) are not symmetric"
                    )));
                }
            }
        }
        Ok(Self {
            node_probs,
            edge_probs,
        })
    }

    /// Point-mass prediction on `g`.
    pub fn one_hot(g: &Graph, node_classes: usize, edge_classes: usize) -> Self {
        Self {
            node_probs: g.node_one_hot(node_classes),
            edge_probs: g.edge_one_hot(edge_classes),
        }
    }

    pub(crate) fn from_parts_unchecked(node_probs: Array2<S>, edge_probs: Array3<S>) -> Self {
        Self {
            node_probs,
            edge_probs,
        }
    }

    pub fn n(&self) -> usize {
        self.node_probs.nrows()
    }

    pub fn node_classes(&self) -> usize {
        self.node_probs.ncols()
    }

    pub fn edge_classes(&self) -> usize {
        self.edge_probs.dim().2
    }

    pub fn node_probs(&self) -> &Array2<S> {
        &self.node_probs
    }

    pub fn edge_probs(&self) -> &Array3<S> {
        &self.edge_probs
    }

    /// Relabels like [`crate::graph::apply_permutation`].
    pub fn permute(&self, p: &Permutation) -> Result<Self> {
        let n = self.n();
        if p.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: p.len(),
            });
        }
        let node_probs = self.node_probs.select(Axis(0), p.mapping());
        let edge_probs = self
            .edge_probs
            .select(Axis(0), p.mapping())
            .select(Axis(1), p.mapping());
        Ok(Self {
            node_probs,
            edge_probs,
        })
    }

    /// Most likely class per node and per pair; ties go to the lowest index.
    pub fn argmax_graph(&self, no_edge: usize) -> Graph {
        let n = self.n();
        let nodes = self.node_probs.rows().into_iter().map(argmax).collect();
        let mut g = Graph::empty(nodes, no_edge);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j, argmax(self.edge_probs.slice(ndarray::s![i, j, ..])));
            }
        }
        g
    }
}

fn argmax<S: Scalar>(row: ndarray::ArrayView1<S>) -> usize {
    let mut best = 0;
    for (k, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights<S> {
    pub lambda1: S,
    pub lambda2: S,
    pub lambda3: S,
}

impl<S: Scalar> Default for LossWeights<S> {
    fn default() -> Self {
        Self {
            lambda1: S::lit(5.0),
            lambda2: S::one(),
            lambda3: S::one(),
        }
    }
}

impl<S: Scalar> LossWeights<S> {
    pub fn new(lambda1: S, lambda2: S, lambda3: S) -> Result<Self> {
        for (name, v) in [
            ("lambda1", lambda1),
            ("lambda2", lambda2),
            ("lambda3", lambda3),
        ] {
            if !v.is_finite() || v < S::zero() {
                return Err(Error::Config(format!(
                    "loss.{name} = {v} must be finite and >= 0"
                )));
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            lambda3,
        })
    }
}

/// Graph the predicted argmax is compared against in the count penalties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MseReference {
    /// The noisy input: a perfect prediction differs from it by exactly the budgets.
    #[default]
    Noisy,
    /// The clean target, as literally written in the loss.
    Clean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig<S> {
    pub weights: LossWeights<S>,
    pub mse_reference: MseReference,
    /// Optimise the non-differentiable argmax counts (contributes no gradient)
    /// instead of the expected-count surrogate.
    pub hard_count: bool,
    /// Drop the count penalties altogether (cross-entropy only).
    pub use_count_penalty: bool,
}

impl<S: Scalar> Default for LossConfig<S> {
    fn default() -> Self {
        Self {
            weights: LossWeights::default(),
            mse_reference: MseReference::Noisy,
            hard_count: false,
            use_count_penalty: true,
        }
    }
}

impl<S: Scalar> LossConfig<S> {
    fn reference<'a>(&self, clean: &'a Graph, noisy: &'a Graph) -> &'a Graph {
        match self.mse_reference {
            MseReference::Noisy => noisy,
            MseReference::Clean => clean,
        }
    }
}

fn check_shapes<S: Scalar>(pred: &Prediction<S>, g: &Graph) -> Result<()> {
    if pred.n() != g.n() {
        return Err(Error::SizeMismatch {
            expected: pred.n(),
            found: g.n(),
        });
    }
    if let Some(&c) = g.nodes().iter().find(|&&c| c >= pred.node_classes()) {
        return Err(Error::ClassOutOfRange {
            class: c,
            count: pred.node_classes(),
        });
    }
    if let Some((_, _, c)) = g
        .edge_list()
        .into_iter()
        .find(|e| e.2 >= pred.edge_classes())
    {
        return Err(Error::ClassOutOfRange {
            class: c,
            count: pred.edge_classes(),
        });
    }
    Ok(())
}

fn neg_log<S: Scalar>(p: S) -> S {
    -p.max(S::lit(PROB_FLOOR)).ln()
}

/// `Σ_i −log p̂_i[x_i] + λ₁ Σ_{i≠j} −log p̂_ij[e_ij]` over ordered pairs.
pub fn cross_entropy_loss<S: Scalar>(
    pred: &Prediction<S>,
    target: &Graph,
    w: &LossWeights<S>,
) -> Result<S> {
    check_shapes(pred, target)?;
    let n = target.n();
    let mut nodes = S::zero();
    for i in 0..n {
        nodes += neg_log(pred.node_probs[[i, target.node(i)]]);
    }
    let mut edges = S::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                edges += neg_log(pred.edge_probs[[i, j, target.edge(i, j)]]);
            }
        }
    }
    Ok(nodes + w.lambda1 * edges)
}

/// `λ₂ (D_x − N(t))² + λ₃ (D_e − M(t))²` with `D` the Hamming distance between
/// the argmax graph and `reference`.
pub fn count_penalty_loss<S: Scalar>(
    pred: &Prediction<S>,
    reference: &Graph,
    budget: &StepBudget<S>,
    w: &LossWeights<S>,
) -> Result<S> {
    check_shapes(pred, reference)?;
    let hard = pred.argmax_graph(reference.no_edge());
    let dx = S::from_count(hamming_nodes(&hard, reference)?) - S::from_count(budget.n_nodes);
    let de = S::from_count(hamming_edges(&hard, reference)?) - S::from_count(budget.n_edges);
    Ok(w.lambda2 * dx * dx + w.lambda3 * de * de)
}

/// Cross-entropy against `clean` plus the count penalty against the
/// configured reference graph.
pub fn total_loss<S: Scalar>(
    pred: &Prediction<S>,
    clean: &Graph,
    noisy: &Graph,
    budget: &StepBudget<S>,
    cfg: &LossConfig<S>,
) -> Result<S> {
    if clean.n() != noisy.n() {
        return Err(Error::SizeMismatch {
            expected: clean.n(),
            found: noisy.n(),
        });
    }
    let ce = cross_entropy_loss(pred, clean, &cfg.weights)?;
    if !cfg.use_count_penalty {
        return Ok(ce);
    }
    let penalty = count_penalty_loss(pred, cfg.reference(clean, noisy), budget, &cfg.weights)?;
    Ok(ce + penalty)
}

/// Expected Hamming distances under the prediction:
/// `Σ_i (1 − p̂_i[ref_i])` and `Σ_{i<j} (1 − p̂_ij[ref_ij])`.
pub fn soft_counts<S: Scalar>(pred: &Prediction<S>, reference: &Graph) -> Result<(S, S)> {
    check_shapes(pred, reference)?;
    let n = reference.n();
    let mut dx = S::zero();
    for i in 0..n {
        dx += S::one() - pred.node_probs[[i, reference.node(i)]];
    }
    let mut de = S::zero();
    for (i, j) in reference.pairs() {
        de += S::one() - pred.edge_probs[[i, j, reference.edge(i, j)]];
    }
    Ok((dx, de))
}

/// Value and probability-gradient of the objective that training minimises.
#[derive(Debug, Clone)]
pub struct ObjectiveGrad<S> {
    pub value: S,
    /// Cross-entropy part of `value`.
    pub cross_entropy: S,
    /// Exact argmax-count penalty, reported whatever the optimised form is.
    pub hard_penalty: S,
    pub node_probs: Array2<S>,
    pub edge_probs: Array3<S>,
}

/// Training objective and its gradient with respect to every predicted
/// probability. With `hard_count` the penalty is the exact (piecewise
/// constant) one; otherwise the expected counts replace the argmax counts.
pub fn objective_with_grad<S: Scalar>(
    pred: &Prediction<S>,
    clean: &Graph,
    noisy: &Graph,
    budget: &StepBudget<S>,
    cfg: &LossConfig<S>,
) -> Result<ObjectiveGrad<S>> {
    let ce = cross_entropy_loss(pred, clean, &cfg.weights)?;
    let reference = cfg.reference(clean, noisy);
    let n = clean.n();
    let floor = S::lit(PROB_FLOOR);
    let w = &cfg.weights;

    let mut gx = Array2::zeros(pred.node_probs.raw_dim());
    let mut ge = Array3::zeros(pred.edge_probs.raw_dim());
    for i in 0..n {
        let p = pred.node_probs[[i, clean.node(i)]];
        if p > floor {
            gx[[i, clean.node(i)]] -= S::one() / p;
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = clean.edge(i, j);
            let p = pred.edge_probs[[i, j, c]];
            if p > floor {
                ge[[i, j, c]] -= w.lambda1 / p;
            }
        }
    }

    let mut value = ce;
    let mut hard_penalty = S::zero();
    if cfg.use_count_penalty {
        hard_penalty = count_penalty_loss(pred, reference, budget, w)?;
        if cfg.hard_count {
            value += hard_penalty;
        } else {
            let (dx, de) = soft_counts(pred, reference)?;
            let rx = dx - S::from_count(budget.n_nodes);
            let re = de - S::from_count(budget.n_edges);
            value += w.lambda2 * rx * rx + w.lambda3 * re * re;
            let two = S::lit(2.0);
            for i in 0..n {
                gx[[i, reference.node(i)]] -= two * w.lambda2 * rx;
            }
            for (i, j) in reference.pairs() {
                ge[[i, j, reference.edge(i, j)]] -= two * w.lambda3 * re;
            }
        }
    }
    Ok(ObjectiveGrad {
        value,
        cross_entropy: ce,
        hard_penalty,
        node_probs: gx,
        edge_probs: ge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_permutation, random_graph, ClassVocab};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn budget(n_nodes: usize, n_edges: usize) -> StepBudget<f64> {
        StepBudget {
            t: 1,
            alpha: 0.5,
            n_nodes,
            n_edges,
            rx: 0.0,
            re: 0.0,
        }
    }

    pub(crate) fn random_prediction<R: Rng>(
        n: usize,
        a: usize,
        b: usize,
        rng: &mut R,
    ) -> Prediction<f64> {
        let mut x = Array2::from_shape_fn((n, a), |_| rng.random::<f64>() + 0.01);
        for mut row in x.rows_mut() {
            let s = row.sum();
            row /= s;
        }
        let mut e = Array3::zeros((n, n, b));
        for i in 0..n {
            for j in (i + 1)..n {
                let raw: Vec<f64> = (0..b).map(|_| rng.random::<f64>() + 0.01).collect();
                let s: f64 = raw.iter().sum();
                for k in 0..b {
                    e[[i, j, k]] = raw[k] / s;
                    e[[j, i, k]] = raw[k] / s;
                }
            }
        }
        Prediction::new(x, e).unwrap()
    }

    #[test]
    fn one_hot_correct_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vocab = ClassVocab::new(4, 3, 0).unwrap();
        let g = random_graph(6, &vocab, 0.4, &mut rng);
        let pred = Prediction::<f64>::one_hot(&g, 4, 3);
        assert_eq!(
            cross_entropy_loss(&pred, &g, &LossWeights::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn uniform_single_node() {
        let g = Graph::empty(vec![2], 0);
        let x = Array2::from_elem((1, 4), 0.25);
        let e = Array3::zeros((1, 1, 2));
        let pred = Prediction::new(x, e).unwrap();
        let ce = cross_entropy_loss(&pred, &g, &LossWeights::default()).unwrap();
        assert!((ce - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_matches_scalar_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vocab = ClassVocab::new(3, 3, 0).unwrap();
        for _ in 0..20 {
            let g = random_graph(5, &vocab, 0.5, &mut rng);
            let pred = random_prediction(5, 3, 3, &mut rng);
            let w = LossWeights::new(5.0, 1.0, 1.0).unwrap();
            let mut expected = 0.0;
            for i in 0..5 {
                expected -= pred.node_probs()[[i, g.node(i)]].ln();
                for j in 0..5 {
                    if i != j {
                        expected -= 5.0 * pred.edge_probs()[[i, j, g.edge(i, j)]].ln();
                    }
                }
            }
            let got = cross_entropy_loss(&pred, &g, &w).unwrap();
            assert!((got - expected).abs() < 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn zero_probability_is_clamped() {
        let g = Graph::empty(vec![1], 0);
        let x = ndarray::array![[1.0, 0.0]];
        let pred = Prediction::new(x, Array3::zeros((1, 1, 2))).unwrap();
        let ce = cross_entropy_loss(&pred, &g, &LossWeights::default()).unwrap();
        assert!((ce - (-PROB_FLOOR.ln())).abs() < 1e-9);
    }

    #[test]
    fn count_penalty_examples() {
        let w = LossWeights::default();
        let reference = Graph::empty(vec![0, 1, 2, 0, 1], 0);
        let exact = Prediction::one_hot(&reference, 3, 2);
        assert_eq!(
            count_penalty_loss(&exact, &reference, &budget(0, 0), &w).unwrap(),
            0.0
        );

        let mut off3 = reference.clone();
        for i in 0..3 {
            off3.set_node(i, (reference.node(i) + 1) % 3);
        }
        let pred = Prediction::one_hot(&off3, 3, 2);
        assert_eq!(
            count_penalty_loss(&pred, &reference, &budget(3, 0), &w).unwrap(),
            0.0
        );

        let mut off2 = reference.clone();
        off2.set_node(0, 1);
        off2.set_node(1, 2);
        let pred = Prediction::one_hot(&off2, 3, 2);
        assert_eq!(
            count_penalty_loss(&pred, &reference, &budget(5, 0), &w).unwrap(),
            9.0
        );
    }

    #[test]
    fn argmax_ties_pick_lowest() {
        let x = ndarray::array![[0.5, 0.5], [0.2, 0.8]];
        let mut e = Array3::zeros((2, 2, 2));
        for (i, j) in [(0, 1), (1, 0)] {
            e[[i, j, 0]] = 0.5;
            e[[i, j, 1]] = 0.5;
        }
        let pred = Prediction::new(x, e).unwrap();
        let g = pred.argmax_graph(0);
        assert_eq!(g.nodes(), &[0, 1]);
        assert_eq!(g.edge(0, 1), 0);
    }

    #[test]
    fn total_loss_vanishes_on_perfect_noise_free_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vocab = ClassVocab::new(3, 3, 0).unwrap();
        let g = random_graph(6, &vocab, 0.4, &mut rng);
        let pred = Prediction::one_hot(&g, 3, 3);
        let cfg = LossConfig::default();
        assert_eq!(total_loss(&pred, &g, &g, &budget(0, 0), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn total_is_sum_of_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vocab = ClassVocab::new(3, 3, 0).unwrap();
        for reference in [MseReference::Noisy, MseReference::Clean] {
            let clean = random_graph(6, &vocab, 0.4, &mut rng);
            let noisy = random_graph(6, &vocab, 0.4, &mut rng);
            let pred = random_prediction(6, 3, 3, &mut rng);
            let cfg = LossConfig {
                mse_reference: reference,
                ..LossConfig::default()
            };
            let b = budget(2, 1);
            let refg = if reference == MseReference::Noisy {
                &noisy
            } else {
                &clean
            };
            let parts = cross_entropy_loss(&pred, &clean, &cfg.weights).unwrap()
                + count_penalty_loss(&pred, refg, &b, &cfg.weights).unwrap();
            assert!((total_loss(&pred, &clean, &noisy, &b, &cfg).unwrap() - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_ignores_non_argmax_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vocab = ClassVocab::new(3, 3, 0).unwrap();
        let reference = random_graph(5, &vocab, 0.5, &mut rng);
        let pred = random_prediction(5, 3, 3, &mut rng);
        let base =
            count_penalty_loss(&pred, &reference, &budget(2, 3), &LossWeights::default()).unwrap();
        // move mass between the two non-argmax node classes
        let mut x = pred.node_probs().clone();
        for mut row in x.rows_mut() {
            let top = argmax(row.view());
            let others: Vec<usize> = (0..3).filter(|&k| k != top).collect();
            let moved = row[others[0]] * 0.9;
            row[others[0]] -= moved;
            row[others[1]] += moved;
            if row[others[1]] >= row[top] {
                // keep the argmax where it was
                let excess = row[others[1]] - row[top] + 1e-3;
                row[others[1]] -= excess;
                row[others[0]] += excess;
            }
        }
        let perturbed = Prediction::new(x, pred.edge_probs().clone()).unwrap();
        let after = count_penalty_loss(
            &perturbed,
            &reference,
            &budget(2, 3),
            &LossWeights::default(),
        )
        .unwrap();
        assert_eq!(base, after);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let vocab = ClassVocab::new(3, 3, 0).unwrap();
        for _ in 0..50 {
            let clean = random_graph(7, &vocab, 0.4, &mut rng);
            let noisy = random_graph(7, &vocab, 0.4, &mut rng);
            let pred = random_prediction(7, 3, 3, &mut rng);
            let p = Permutation::random(7, &mut rng);
            let cfg = LossConfig::default();
            let b = budget(3, 2);
            let before = total_loss(&pred, &clean, &noisy, &b, &cfg).unwrap();
            let after = total_loss(
                &pred.permute(&p).unwrap(),
                &apply_permutation(&clean, &p).unwrap(),
                &apply_permutation(&noisy, &p).unwrap(),
                &b,
                &cfg,
            )
            .unwrap();
            assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn probability_gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vocab = ClassVocab::new(3, 3, 0).unwrap();
        let clean = random_graph(4, &vocab, 0.5, &mut rng);
        let noisy = random_graph(4, &vocab, 0.5, &mut rng);
        let pred = random_prediction(4, 3, 3, &mut rng);
        let cfg = LossConfig::default();
        let b = budget(2, 1);
        let grad = objective_with_grad(&pred, &clean, &noisy, &b, &cfg).unwrap();
        // the objective is a function of the raw entries; perturb one node entry
        let h = 1e-6;
        for (i, k) in [(0, 0), (1, 2), (3, 1)] {
            let eval = |delta: f64| {
                let mut x = pred.node_probs().clone();
                x[[i, k]] += delta;
                let p = Prediction::from_parts_unchecked(x, pred.edge_probs().clone());
                objective_with_grad(&p, &clean, &noisy, &b, &cfg)
                    .unwrap()
                    .value
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            assert!((fd - grad.node_probs[[i, k]]).abs() < 1e-4 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn prediction_validation() {
        assert!(Prediction::new(ndarray::array![[0.5, 0.4]], Array3::zeros((1, 1, 2))).is_err());
        assert!(Prediction::new(ndarray::array![[1.0, 0.0]], Array3::zeros((2, 2, 2))).is_err());
        let mut e = Array3::zeros((2, 2, 2));
        e[[0, 1, 0]] = 1.0;
        e[[1, 0, 1]] = 1.0;
        assert!(Prediction::new(ndarray::array![[1.0, 0.0], [1.0, 0.0]], e).is_err());
    }
}
