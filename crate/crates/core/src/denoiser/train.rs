use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DenoiserInput, Mpnn};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::loss::{objective_with_grad, LossConfig, ObjectiveGrad};
use crate::noise::{forward_noise_scoped, EdgeScope, TransitionMatrices};
use crate::scalar::Scalar;
use crate::schedule::{step_budget, ScheduleConfig, ScheduleParams};

/// Loss above which training is considered to have diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<S> {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: S,
    pub momentum: S,
    /// Rescale the batch gradient to at most this L2 norm.
    pub clip_norm: Option<S>,
    pub validation_size: usize,
    pub eval_every: usize,
    pub loss: LossConfig<S>,
    pub edge_scope: EdgeScope,
}

impl<S: Scalar> Default for TrainConfig<S> {
    fn default() -> Self {
        Self {
            steps: 1000,
            batch_size: 16,
            learning_rate: S::lit(0.01),
            momentum: S::lit(0.9),
            clip_norm: Some(S::lit(5.0)),
            validation_size: 32,
            eval_every: 50,
            loss: LossConfig::default(),
            edge_scope: EdgeScope::Induced,
        }
    }
}

impl<S: Scalar> TrainConfig<S> {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate >= S::zero()) || !self.learning_rate.is_finite() {
            return Err(Error::Config(
                "learning rate must be finite and non-negative".into(),
            ));
        }
        if !(self.momentum >= S::zero() && self.momentum < S::one()) {
            return Err(Error::Config("momentum must lie in [0, 1)".into()));
        }
        if let Some(c) = self.clip_norm {
            if !(c > S::zero()) {
                return Err(Error::Config("clip_norm must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Mean validation metrics after `step` parameter updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_cross_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub trace: Vec<TracePoint>,
}

impl TrainReport {
    pub fn initial(&self) -> Option<&TracePoint> {
        self.trace.first()
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.trace.last()
    }
}

/// One corrupted training example.
#[derive(Debug, Clone)]
pub struct Example<S> {
    pub clean: Graph,
    pub noisy: Graph,
    pub t: usize,
    pub params: ScheduleParams<S>,
}

impl<S: Scalar> Example<S> {
    /// Corrupts `clean` at a step drawn uniformly from `1..=T`.
    pub fn draw<R: Rng + ?Sized>(
        clean: &Graph,
        schedule: &ScheduleConfig<S>,
        q: &TransitionMatrices<S>,
        scope: EdgeScope,
        rng: &mut R,
    ) -> Result<Self> {
        let params = schedule.for_nodes(clean.n())?;
        let t = rng.random_range(1..=params.total_steps());
        let (noisy, _) = forward_noise_scoped(clean, t, &params, q, scope, rng)?;
        Ok(Self {
            clean: clean.clone(),
            noisy,
            t,
            params,
        })
    }
}

/// Objective on one example and its gradient with respect to every parameter.
pub fn parameter_gradient<S: Scalar>(
    net: &Mpnn<S>,
    example: &Example<S>,
    loss: &LossConfig<S>,
) -> Result<(ObjectiveGrad<S>, Vec<S>)> {
    let cfg = net.config();
    let input = DenoiserInput::new(
        example.noisy.clone(),
        example.t,
        &example.params,
        cfg.edge_classes,
        cfg.n_max,
    )?;
    let (pred, cache) = net.forward(&input)?;
    let budget = step_budget(example.t, &example.params)?;
    let obj = objective_with_grad(&pred, &example.clean, &example.noisy, &budget, loss)?;
    let grad = net.backward(&cache, &obj.node_probs, &obj.edge_probs);
    Ok((obj, grad))
}

fn evaluate<S: Scalar>(
    net: &Mpnn<S>,
    examples: &[Example<S>],
    loss: &LossConfig<S>,
) -> Result<(f64, f64)> {
    if examples.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let parts: Vec<(f64, f64)> = examples
        .par_iter()
        .map(|ex| {
            let cfg = net.config();
            let input = DenoiserInput::new(
                ex.noisy.clone(),
                ex.t,
                &ex.params,
                cfg.edge_classes,
                cfg.n_max,
            )?;
            let (pred, _) = net.forward(&input)?;
            let budget = step_budget(ex.t, &ex.params)?;
            let obj = objective_with_grad(&pred, &ex.clean, &ex.noisy, &budget, loss)?;
            Ok((obj.value.as_f64(), obj.cross_entropy.as_f64()))
        })
        .collect::<Result<_>>()?;
    let k = parts.len() as f64;
    let (l, ce) = parts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok((l / k, ce / k))
}

/// Momentum gradient descent on mini-batches of freshly corrupted graphs.
///
/// Per-example gradients are computed in parallel from seeds drawn off `rng`
/// and summed in a fixed order, so results do not depend on thread count.
pub fn train<S: Scalar, R: Rng + ?Sized>(
    net: &mut Mpnn<S>,
    dataset: &[Graph],
    schedule: &ScheduleConfig<S>,
    q: &TransitionMatrices<S>,
    cfg: &TrainConfig<S>,
    rng: &mut R,
) -> Result<TrainReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    let validation: Vec<Example<S>> = (0..cfg.validation_size)
        .map(|_| {
            let g = &dataset[rng.random_range(0..dataset.len())];
            Example::draw(g, schedule, q, cfg.edge_scope, rng)
        })
        .collect::<Result<_>>()?;

    let mut velocity = vec![S::zero(); net.num_params()];
    let mut trace = Vec::new();
    let (v0, ce0) = evaluate(net, &validation, &cfg.loss)?;
    trace.push(TracePoint {
        step: 0,
        train_loss: f64::NAN,
        val_loss: v0,
        val_cross_entropy: ce0,
    });
    info!("step 0: validation loss {v0:.4}, cross-entropy {ce0:.4}");

    let mut running = 0.0;
    let mut running_count = 0usize;
    for step in 1..=cfg.steps {
        let seeds: Vec<(usize, u64)> = (0..cfg.batch_size)
            .map(|_| (rng.random_range(0..dataset.len()), rng.random()))
            .collect();
        let results: Vec<(S, Vec<S>)> = seeds
            .par_iter()
            .map(|&(idx, seed)| {
                let mut item_rng = ChaCha8Rng::seed_from_u64(seed);
                let ex = Example::draw(&dataset[idx], schedule, q, cfg.edge_scope, &mut item_rng)?;
                let (obj, grad) = parameter_gradient(net, &ex, &cfg.loss)?;
                Ok((obj.value, grad))
            })
            .collect::<Result<_>>()?;

        let scale = S::one() / S::from_count(cfg.batch_size);
        let mut grad = vec![S::zero(); net.num_params()];
        let mut batch_loss = S::zero();
        for (value, g) in &results {
            batch_loss += *value;
            for (acc, &x) in grad.iter_mut().zip(g) {
                *acc += x;
            }
        }
        batch_loss *= scale;
        let loss64 = batch_loss.as_f64();
        if !loss64.is_finite() || loss64 > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { step, loss: loss64 });
        }
        grad.iter_mut().for_each(|g| *g *= scale);
        if let Some(limit) = cfg.clip_norm {
            let norm = grad.iter().map(|&g| g * g).sum::<S>().sqrt();
            if norm > limit {
                let f = limit / norm;
                grad.iter_mut().for_each(|g| *g *= f);
            }
        }
        for ((p, v), &g) in net.params_mut().iter_mut().zip(&mut velocity).zip(&grad) {
            *v = cfg.momentum * *v + g;
            *p -= cfg.learning_rate * *v;
        }
        if net.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged {
                step,
                loss: f64::INFINITY,
            });
        }
        running += loss64;
        running_count += 1;

        if step % cfg.eval_every.max(1) == 0 || step == cfg.steps {
            let (vl, vce) = evaluate(net, &validation, &cfg.loss)?;
            let train_loss = running / running_count as f64;
            running = 0.0;
            running_count = 0;
            debug!(
                "step {step}: train {train_loss:.4}, validation {vl:.4}, cross-entropy {vce:.4}"
            );
            trace.push(TracePoint {
                step,
                train_loss,
                val_loss: vl,
                val_cross_entropy: vce,
            });
        }
    }
    if let Some(last) = trace.last() {
        info!(
            "finished after {} steps: validation cross-entropy {:.4}",
            cfg.steps, last.val_cross_entropy
        );
    }
    Ok(TrainReport { trace })
}
