use ndarray::{Array1, Array2, Array3, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Denoiser, DenoiserInput};
use crate::error::{Error, Result};
use crate::features::{node_feature_dim, GLOBAL_FEATURES};
use crate::graph::all_pairs;
use crate::loss::Prediction;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpnnConfig {
    pub node_classes: usize,
    pub edge_classes: usize,
    pub hidden: usize,
    pub layers: usize,
    /// Largest graph size seen in training; used to scale the size feature.
    pub n_max: usize,
}

impl MpnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_classes == 0 || self.edge_classes < 2 {
            return Err(Error::Config(
                "denoiser vocabulary sizes are invalid".into(),
            ));
        }
        if self.hidden == 0 {
            return Err(Error::Config("denoiser.width must be positive".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    offset: usize,
    rows: usize,
    cols: usize,
}

impl Slot {
    fn len(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LayerSlots {
    self_weight: Slot,
    msg_node: Slot,
    msg_edge: Slot,
    bias: Slot,
    pair_self: Slot,
    pair_node: Slot,
    pair_bias: Slot,
}

/// Offsets of every weight tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    in_node: Slot,
    in_feat: Slot,
    in_global: Slot,
    in_bias: Slot,
    in_edge: Slot,
    in_edge_bias: Slot,
    layers: Vec<LayerSlots>,
    out_node: Slot,
    out_node_bias: Slot,
    out_edge: Slot,
    out_edge_bias: Slot,
    total: usize,
}

impl ParamLayout {
    pub fn new(cfg: &MpnnConfig) -> Self {
        let d = cfg.hidden;
        let mut offset = 0;
        let mut slot = |rows: usize, cols: usize| {
            let s = Slot { offset, rows, cols };
            offset += rows * cols;
            s
        };
        let in_node = slot(cfg.node_classes, d);
        let in_feat = slot(node_feature_dim(cfg.edge_classes), d);
        let in_global = slot(GLOBAL_FEATURES, d);
        let in_bias = slot(1, d);
        let in_edge = slot(cfg.edge_classes, d);
        let in_edge_bias = slot(1, d);
        let layers = (0..cfg.layers)
            .map(|_| LayerSlots {
                self_weight: slot(d, d),
                msg_node: slot(d, d),
                msg_edge: slot(d, d),
                bias: slot(1, d),
                pair_self: slot(d, d),
                pair_node: slot(d, d),
                pair_bias: slot(1, d),
            })
            .collect();
        let out_node = slot(d, cfg.node_classes);
        let out_node_bias = slot(1, cfg.node_classes);
        let out_edge = slot(d, cfg.edge_classes);
        let out_edge_bias = slot(1, cfg.edge_classes);
        Self {
            in_node,
            in_feat,
            in_global,
            in_bias,
            in_edge,
            in_edge_bias,
            layers,
            out_node,
            out_node_bias,
            out_edge,
            out_edge_bias,
            total: offset,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Weight matrices (not biases) with their fan-in and fan-out.
    fn weight_slots(&self) -> Vec<Slot> {
        let mut w = vec![self.in_node, self.in_feat, self.in_global, self.in_edge];
        for l in &self.layers {
            w.extend([
                l.self_weight,
                l.msg_node,
                l.msg_edge,
                l.pair_self,
                l.pair_node,
            ]);
        }
        w.extend([self.out_node, self.out_edge]);
        w
    }
}

fn view<S: Scalar>(params: &[S], s: Slot) -> ArrayView2<'_, S> {
    ArrayView2::from_shape((s.rows, s.cols), &params[s.offset..s.offset + s.len()])
        .expect("slot shape matches layout")
}

fn view_mut<S: Scalar>(params: &mut [S], s: Slot) -> ArrayViewMut2<'_, S> {
    ArrayViewMut2::from_shape((s.rows, s.cols), &mut params[s.offset..s.offset + s.len()])
        .expect("slot shape matches layout")
}

fn bias_row<S: Scalar>(params: &[S], s: Slot) -> ndarray::ArrayView1<'_, S> {
    ndarray::ArrayView1::from(&params[s.offset..s.offset + s.len()])
}

fn softmax_rows<S: Scalar>(logits: &Array2<S>) -> Array2<S> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(S::neg_infinity(), S::max);
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    out
}

/// Gradient through a row-wise softmax: `p ⊙ (g − ⟨g, p⟩)`.
fn softmax_backward<S: Scalar>(probs: &Array2<S>, grad: &Array2<S>) -> Array2<S> {
    let mut out = Array2::zeros(probs.raw_dim());
    for ((p, g), mut o) in probs
        .rows()
        .into_iter()
        .zip(grad.rows())
        .zip(out.rows_mut())
    {
        let dot = p.dot(&g);
        for k in 0..p.len() {
            o[k] = p[k] * (g[k] - dot);
        }
    }
    out
}

fn tanh_grad<S: Scalar>(upstream: &Array2<S>, activated: &Array2<S>) -> Array2<S> {
    let mut out = upstream.clone();
    out.zip_mut_with(activated, |g, &a| *g *= S::one() - a * a);
    out
}

struct LayerCache<S> {
    h_in: Array2<S>,
    p_in: Array2<S>,
    agg_h: Array2<S>,
    inc_p: Array2<S>,
    pair_h: Array2<S>,
    tanh_h: Array2<S>,
    tanh_p: Array2<S>,
}

/// Intermediate activations of one forward pass, consumed by [`Mpnn::backward`].
pub struct ForwardCache<S> {
    n: usize,
    pairs: Vec<(usize, usize)>,
    x: Array2<S>,
    z: Array2<S>,
    y: Array1<S>,
    e: Array2<S>,
    h0: Array2<S>,
    p0: Array2<S>,
    layers: Vec<LayerCache<S>>,
    h_out: Array2<S>,
    p_out: Array2<S>,
    node_probs: Array2<S>,
    pair_probs: Array2<S>,
}

/// Permutation-equivariant message-passing network over node states and
/// unordered-pair states.
///
/// Each layer updates nodes from the mean over the other nodes of
/// `h_j A + p_ij B`, and pairs from `p_ij C + (h_i + h_j) D`, both through a
/// residual `tanh`. Pair states are stored once per unordered pair, so edge
/// predictions are symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpnn<S> {
    config: MpnnConfig,
    layout: ParamLayout,
    params: Vec<S>,
}

impl<S: Scalar> Mpnn<S> {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(config: MpnnConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::new(&config);
        let mut params = vec![S::zero(); layout.len()];
        for s in layout.weight_slots() {
            let bound = (6.0 / (s.rows + s.cols) as f64).sqrt();
            for w in &mut params[s.offset..s.offset + s.len()] {
                *w = S::lit(rng.random_range(-bound..bound));
            }
        }
        Ok(Self {
            config,
            layout,
            params,
        })
    }

    pub fn from_params(config: MpnnConfig, params: Vec<S>) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::new(&config);
        if params.len() != layout.len() {
            return Err(Error::Shape(format!(
                "expected {} parameters, found {}",
                layout.len(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("non-finite denoiser parameter".into()));
        }
        Ok(Self {
            config,
            layout,
            params,
        })
    }

    pub fn config(&self) -> &MpnnConfig {
        &self.config
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [S] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn check_input(&self, input: &DenoiserInput<S>) -> Result<()> {
        let g = &input.graph;
        let f = node_feature_dim(self.config.edge_classes);
        if input.features.node.dim() != (g.n(), f) || input.features.global.len() != GLOBAL_FEATURES
        {
            return Err(Error::Shape("feature arrays do not match the graph".into()));
        }
        if let Some(&c) = g.nodes().iter().find(|&&c| c >= self.config.node_classes) {
            return Err(Error::ClassOutOfRange {
                class: c,
                count: self.config.node_classes,
            });
        }
        if let Some(e) = g
            .edge_list()
            .iter()
            .find(|e| e.2 >= self.config.edge_classes)
        {
            return Err(Error::ClassOutOfRange {
                class: e.2,
                count: self.config.edge_classes,
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &DenoiserInput<S>) -> Result<(Prediction<S>, ForwardCache<S>)> {
        self.check_input(input)?;
        let g = &input.graph;
        let n = g.n();
        let lay = &self.layout;
        let w = &self.params;
        let pairs: Vec<(usize, usize)> = all_pairs(n).collect();
        let m = pairs.len();

        let x: Array2<S> = g.node_one_hot(self.config.node_classes);
        let z = input.features.node.clone();
        let y = input.features.global.clone();
        let mut e = Array2::zeros((m, self.config.edge_classes));
        for (k, &(i, j)) in pairs.iter().enumerate() {
            e[[k, g.edge(i, j)]] = S::one();
        }

        let global = y.view().insert_axis(Axis(0)).dot(&view(w, lay.in_global));
        let mut pre = x.dot(&view(w, lay.in_node)) + z.dot(&view(w, lay.in_feat));
        pre += &global;
        pre += &bias_row(w, lay.in_bias);
        let h0 = pre.mapv(|v| v.tanh());
        let mut q = e.dot(&view(w, lay.in_edge));
        q += &bias_row(w, lay.in_edge_bias);
        let p0 = q.mapv(|v| v.tanh());

        let scale = if n > 1 {
            S::one() / S::from_count(n - 1)
        } else {
            S::zero()
        };
        let mut h = h0.clone();
        let mut p = p0.clone();
        let mut layers = Vec::with_capacity(lay.layers.len());
        for ls in &lay.layers {
            let sum_h = h.sum_axis(Axis(0));
            let agg_h = h.mapv(|v| -v) + &sum_h;
            let mut inc_p = Array2::zeros(h.raw_dim());
            let mut pair_h = Array2::zeros(p.raw_dim());
            for (k, &(a, b)) in pairs.iter().enumerate() {
                let row = p.row(k);
                inc_p.row_mut(a).zip_mut_with(&row, |acc, &v| *acc += v);
                inc_p.row_mut(b).zip_mut_with(&row, |acc, &v| *acc += v);
                let mut hs = pair_h.row_mut(k);
                hs.assign(&h.row(a));
                hs += &h.row(b);
            }
            let msg = (agg_h.dot(&view(w, ls.msg_node)) + inc_p.dot(&view(w, ls.msg_edge))) * scale;
            let mut sh = h.dot(&view(w, ls.self_weight)) + msg;
            sh += &bias_row(w, ls.bias);
            let tanh_h = sh.mapv(|v| v.tanh());
            let mut sp = p.dot(&view(w, ls.pair_self)) + pair_h.dot(&view(w, ls.pair_node));
            sp += &bias_row(w, ls.pair_bias);
            let tanh_p = sp.mapv(|v| v.tanh());
            let h_next = &h + &tanh_h;
            let p_next = &p + &tanh_p;
            layers.push(LayerCache {
                h_in: h,
                p_in: p,
                agg_h,
                inc_p,
                pair_h,
                tanh_h,
                tanh_p,
            });
            h = h_next;
            p = p_next;
        }

        let mut node_logits = h.dot(&view(w, lay.out_node));
        node_logits += &bias_row(w, lay.out_node_bias);
        let node_probs = softmax_rows(&node_logits);
        let mut pair_logits = p.dot(&view(w, lay.out_edge));
        pair_logits += &bias_row(w, lay.out_edge_bias);
        let pair_probs = softmax_rows(&pair_logits);

        let b = self.config.edge_classes;
        let mut edge_probs = Array3::zeros((n, n, b));
        for (k, &(i, j)) in pairs.iter().enumerate() {
            for c in 0..b {
                edge_probs[[i, j, c]] = pair_probs[[k, c]];
                edge_probs[[j, i, c]] = pair_probs[[k, c]];
            }
        }
        let prediction = Prediction::from_parts_unchecked(node_probs.clone(), edge_probs);
        let cache = ForwardCache {
            n,
            pairs,
            x,
            z,
            y,
            e,
            h0,
            p0,
            layers,
            h_out: h,
            p_out: p,
            node_probs,
            pair_probs,
        };
        Ok((prediction, cache))
    }

    /// Parameter gradient given the loss gradient with respect to the
    /// predicted probabilities (both orientations of each pair).
    pub fn backward(
        &self,
        cache: &ForwardCache<S>,
        grad_node_probs: &Array2<S>,
        grad_edge_probs: &Array3<S>,
    ) -> Vec<S> {
        let lay = &self.layout;
        let w = &self.params;
        let mut grad = vec![S::zero(); lay.len()];
        let n = cache.n;
        let b = self.config.edge_classes;

        let mut g_pair = Array2::zeros((cache.pairs.len(), b));
        for (k, &(i, j)) in cache.pairs.iter().enumerate() {
            for c in 0..b {
                g_pair[[k, c]] = grad_edge_probs[[i, j, c]] + grad_edge_probs[[j, i, c]];
            }
        }

        let d_node_logits = softmax_backward(&cache.node_probs, grad_node_probs);
        let d_pair_logits = softmax_backward(&cache.pair_probs, &g_pair);
        view_mut(&mut grad, lay.out_node)
            .scaled_add(S::one(), &cache.h_out.t().dot(&d_node_logits));
        view_mut(&mut grad, lay.out_node_bias).scaled_add(
            S::one(),
            &d_node_logits.sum_axis(Axis(0)).insert_axis(Axis(0)),
        );
        view_mut(&mut grad, lay.out_edge)
            .scaled_add(S::one(), &cache.p_out.t().dot(&d_pair_logits));
        view_mut(&mut grad, lay.out_edge_bias).scaled_add(
            S::one(),
            &d_pair_logits.sum_axis(Axis(0)).insert_axis(Axis(0)),
        );
        let mut dh = d_node_logits.dot(&view(w, lay.out_node).t());
        let mut dp = d_pair_logits.dot(&view(w, lay.out_edge).t());

        let scale = if n > 1 {
            S::one() / S::from_count(n - 1)
        } else {
            S::zero()
        };
        for (ls, lc) in lay.layers.iter().zip(&cache.layers).rev() {
            let dsh = tanh_grad(&dh, &lc.tanh_h);
            let dsp = tanh_grad(&dp, &lc.tanh_p);

            view_mut(&mut grad, ls.self_weight).scaled_add(S::one(), &lc.h_in.t().dot(&dsh));
            view_mut(&mut grad, ls.bias)
                .scaled_add(S::one(), &dsh.sum_axis(Axis(0)).insert_axis(Axis(0)));
            view_mut(&mut grad, ls.msg_node).scaled_add(scale, &lc.agg_h.t().dot(&dsh));
            view_mut(&mut grad, ls.msg_edge).scaled_add(scale, &lc.inc_p.t().dot(&dsh));
            view_mut(&mut grad, ls.pair_self).scaled_add(S::one(), &lc.p_in.t().dot(&dsp));
            view_mut(&mut grad, ls.pair_node).scaled_add(S::one(), &lc.pair_h.t().dot(&dsp));
            view_mut(&mut grad, ls.pair_bias)
                .scaled_add(S::one(), &dsp.sum_axis(Axis(0)).insert_axis(Axis(0)));

            // residual paths
            let mut dh_in = dh.clone();
            let mut dp_in = dp.clone();
            dh_in += &dsh.dot(&view(w, ls.self_weight).t());
            dp_in += &dsp.dot(&view(w, ls.pair_self).t());

            let d_agg = dsh.dot(&view(w, ls.msg_node).t()) * scale;
            let total = d_agg.sum_axis(Axis(0));
            dh_in += &total;
            dh_in -= &d_agg;

            let d_inc = dsh.dot(&view(w, ls.msg_edge).t()) * scale;
            let d_pair_h = dsp.dot(&view(w, ls.pair_node).t());
            for (k, &(a, bb)) in cache.pairs.iter().enumerate() {
                let mut row = dp_in.row_mut(k);
                row += &d_inc.row(a);
                row += &d_inc.row(bb);
                dh_in
                    .row_mut(a)
                    .zip_mut_with(&d_pair_h.row(k), |acc, &v| *acc += v);
                dh_in
                    .row_mut(bb)
                    .zip_mut_with(&d_pair_h.row(k), |acc, &v| *acc += v);
            }
            dh = dh_in;
            dp = dp_in;
        }

        let dpre = tanh_grad(&dh, &cache.h0);
        view_mut(&mut grad, lay.in_node).scaled_add(S::one(), &cache.x.t().dot(&dpre));
        view_mut(&mut grad, lay.in_feat).scaled_add(S::one(), &cache.z.t().dot(&dpre));
        let col = dpre.sum_axis(Axis(0));
        let outer = cache
            .y
            .view()
            .insert_axis(Axis(1))
            .dot(&col.view().insert_axis(Axis(0)));
        view_mut(&mut grad, lay.in_global).scaled_add(S::one(), &outer);
        view_mut(&mut grad, lay.in_bias).scaled_add(S::one(), &col.insert_axis(Axis(0)));
        let dq = tanh_grad(&dp, &cache.p0);
        view_mut(&mut grad, lay.in_edge).scaled_add(S::one(), &cache.e.t().dot(&dq));
        view_mut(&mut grad, lay.in_edge_bias)
            .scaled_add(S::one(), &dq.sum_axis(Axis(0)).insert_axis(Axis(0)));
        grad
    }
}

impl<S: Scalar> Denoiser<S> for Mpnn<S> {
    fn predict(&self, input: &DenoiserInput<S>) -> Result<Prediction<S>> {
        self.forward(input).map(|(p, _)| p)
    }
}
