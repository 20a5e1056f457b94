//! Cosine schedule and the deterministic per-step node/edge budgets.
//!
//! `alpha(t) = cos²(π/2 · (t/T + c)/(1 + c))` with `T = k·n`. The node budget
//! is `N(t) = ⌊(1 − α)·n⌋` and the edge budget
//! `M(t) = ⌊(1 − α)·N(t)·(N(t) − 1)·0.5·r⌋`, using the floored `N(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::pair_count;
use crate::scalar::Scalar;

pub const DEFAULT_K: usize = 2;
pub const DEFAULT_R: f64 = 0.2;
pub const DEFAULT_C: f64 = 0.008;

/// Hyperparameters shared by every graph size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig<S> {
    pub k: usize,
    pub r: S,
    pub c: S,
}

impl<S: Scalar> Default for ScheduleConfig<S> {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            r: S::lit(DEFAULT_R),
            c: S::lit(DEFAULT_C),
        }
    }
}

impl<S: Scalar> ScheduleConfig<S> {
    pub fn new(k: usize, r: S, c: S) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSchedule("k must be positive".into()));
        }
        if !(r > S::zero() && r <= S::one()) {
            return Err(Error::InvalidSchedule(format!("r = {r} outside (0, 1]")));
        }
        if !(c > S::zero()) || !c.is_finite() {
            return Err(Error::InvalidSchedule(format!("c = {c} must be positive")));
        }
        Ok(Self { k, r, c })
    }

    /// Schedule for a graph with `n` nodes.
    pub fn for_nodes(&self, n: usize) -> Result<ScheduleParams<S>> {
        ScheduleParams::new(self.k, self.r, self.c, n)
    }
}

/// Schedule bound to one graph size; `T = k·n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams<S> {
    k: usize,
    r: S,
    c: S,
    n: usize,
    total_steps: usize,
}

impl<S: Scalar> ScheduleParams<S> {
    pub fn new(k: usize, r: S, c: S, n: usize) -> Result<Self> {
        let cfg = ScheduleConfig::new(k, r, c)?;
        if n == 0 {
            return Err(Error::InvalidSchedule("n must be positive".into()));
        }
        Ok(Self {
            k: cfg.k,
            r: cfg.r,
            c: cfg.c,
            n,
            total_steps: k * n,
        })
    }

    /// Schedule with an explicit step count instead of `k·n`.
    pub fn with_total_steps(r: S, c: S, n: usize, total_steps: usize) -> Result<Self> {
        let mut params = Self::new(1, r, c, n)?;
        if total_steps == 0 {
            return Err(Error::InvalidSchedule("T must be at least 1".into()));
        }
        params.total_steps = total_steps;
        Ok(params)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> S {
        self.r
    }

    pub fn c(&self) -> S {
        self.c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    fn check_step(&self, t: usize) -> Result<()> {
        if t > self.total_steps {
            return Err(Error::StepOutOfRange {
                t,
                total: self.total_steps,
            });
        }
        Ok(())
    }
}

/// Budgets and conditioning ratios at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepBudget<S> {
    pub t: usize,
    pub alpha: S,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub rx: S,
    pub re: S,
}

/// Cosine-squared retention at fractional position `t/T`.
pub fn cosine_alpha<S: Scalar>(t: usize, total_steps: usize, c: S) -> S {
    if t == total_steps {
        // the angle is exactly π/2; cos(π/2) in floating point is ~6e-17
        return S::zero();
    }
    let frac = S::from_count(t) / S::from_count(total_steps);
    let angle = S::FRAC_PI_2() * (frac + c) / (S::one() + c);
    let cos = angle.cos();
    cos * cos
}

pub fn alpha<S: Scalar>(t: usize, params: &ScheduleParams<S>) -> Result<S> {
    params.check_step(t)?;
    Ok(cosine_alpha(t, params.total_steps, params.c))
}

/// `N(t) = ⌊(1 − α)·n⌋`.
pub fn node_budget<S: Scalar>(t: usize, params: &ScheduleParams<S>) -> Result<usize> {
    let a = alpha(t, params)?;
    Ok(floor_count((S::one() - a) * S::from_count(params.n)))
}

/// `M(t) = ⌊(1 − α)·N(t)·(N(t) − 1)·0.5·r⌋`.
pub fn edge_budget<S: Scalar>(t: usize, params: &ScheduleParams<S>) -> Result<usize> {
    let a = alpha(t, params)?;
    let nodes = floor_count((S::one() - a) * S::from_count(params.n));
    Ok(edge_budget_for(a, nodes, params.r))
}

pub(crate) fn edge_budget_for<S: Scalar>(alpha: S, nodes: usize, r: S) -> usize {
    if nodes < 2 {
        return 0;
    }
    let nodes_s = S::from_count(nodes);
    let raw = (S::one() - alpha) * nodes_s * (nodes_s - S::one()) * S::lit(0.5) * r;
    floor_count(raw).min(pair_count(nodes))
}

pub(crate) fn floor_count<S: Scalar>(x: S) -> usize {
    x.floor().max(S::zero()).to_usize().unwrap_or(0)
}

pub fn step_budget<S: Scalar>(t: usize, params: &ScheduleParams<S>) -> Result<StepBudget<S>> {
    let a = alpha(t, params)?;
    let n_nodes = floor_count((S::one() - a) * S::from_count(params.n));
    let n_edges = edge_budget_for(a, n_nodes, params.r);
    let n = params.n;
    let rx = S::from_count(n_nodes) / S::from_count(n);
    let re = if n < 2 {
        S::zero()
    } else {
        S::from_count(n_edges) / (S::lit(0.5) * S::from_count(n) * S::from_count(n - 1))
    };
    Ok(StepBudget {
        t,
        alpha: a,
        n_nodes,
        n_edges,
        rx,
        re,
    })
}

/// Budgets for every step `0..=T`.
pub fn staircase<S: Scalar>(params: &ScheduleParams<S>) -> Vec<StepBudget<S>> {
    (0..=params.total_steps)
        .map(|t| step_budget(t, params).expect("step within range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> ScheduleParams<f64> {
        ScheduleParams::new(2, 0.2, 0.008, n).unwrap()
    }

    #[test]
    fn alpha_endpoints() {
        let p = params(9);
        assert_eq!(alpha(18, &p).unwrap(), 0.0);
        let tiny = ScheduleParams::<f64>::new(2, 0.2, 1e-9, 9).unwrap();
        assert!((alpha(0, &tiny).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            alpha(19, &p),
            Err(Error::StepOutOfRange { t: 19, total: 18 })
        ));
    }

    #[test]
    fn alpha_midpoint_matches_high_precision_value() {
        // cos²(π/2 · 0.508/1.008), evaluated with 40-digit arithmetic
        let expected = 0.493_766_842_702_292_48_f64;
        let p = ScheduleParams::<f64>::new(1, 0.2, 0.008, 10).unwrap();
        assert!((alpha(5, &p).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn alpha_strictly_decreasing() {
        let p = params(12);
        let values: Vec<f64> = (0..=24).map(|t| alpha(t, &p).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn node_budget_endpoints() {
        let p = params(9);
        assert_eq!(node_budget(18, &p).unwrap(), 9);
        assert_eq!(node_budget(0, &p).unwrap(), 0);
    }

    #[test]
    fn six_node_staircase() {
        let p = ScheduleParams::<f64>::new(2, 0.2, 0.008, 6).unwrap();
        let nodes: Vec<usize> = (0..=12).map(|t| node_budget(t, &p).unwrap()).collect();
        let edges: Vec<usize> = (0..=12).map(|t| edge_budget(t, &p).unwrap()).collect();
        // frozen from a 40-digit evaluation of the closed forms
        assert_eq!(nodes, vec![0, 0, 0, 0, 1, 2, 3, 3, 4, 5, 5, 5, 6]);
        assert_eq!(edges, vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 3]);
        assert!(nodes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn edge_budget_endpoint() {
        let p = ScheduleParams::<f64>::new(2, 0.2, 0.008, 6).unwrap();
        assert_eq!(edge_budget(12, &p).unwrap(), 3);
    }

    #[test]
    fn step_budget_ratios() {
        let p = params(9);
        let b0 = step_budget(0, &p).unwrap();
        assert_eq!((b0.n_nodes, b0.n_edges), (0, 0));
        assert_eq!((b0.rx, b0.re), (0.0, 0.0));
        let end = step_budget(18, &p).unwrap();
        assert_eq!(end.rx, 1.0);
        let mid = step_budget(13, &p).unwrap();
        assert_eq!(mid.re, mid.n_edges as f64 / 36.0);
        assert_eq!(mid.rx, mid.n_nodes as f64 / 9.0);
    }

    #[test]
    fn single_node_graph() {
        let p = ScheduleParams::<f64>::new(2, 0.2, 0.008, 1).unwrap();
        let b = step_budget(2, &p).unwrap();
        assert_eq!((b.n_nodes, b.n_edges, b.re), (1, 0, 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ScheduleParams::new(0, 0.2, 0.008, 5).is_err());
        assert!(ScheduleParams::new(2, 0.0, 0.008, 5).is_err());
        assert!(ScheduleParams::new(2, 1.5, 0.008, 5).is_err());
        assert!(ScheduleParams::new(2, 0.2, 0.0, 5).is_err());
        assert!(ScheduleParams::new(2, 0.2, 0.008, 0).is_err());
        assert!(ScheduleParams::<f64>::with_total_steps(0.2, 0.008, 5, 0).is_err());
    }

    #[test]
    fn single_precision_agrees_on_budgets() {
        let p64 = ScheduleParams::new(2, 0.2, 0.008, 9).unwrap();
        let p32 = ScheduleParams::new(2, 0.2f32, 0.008f32, 9).unwrap();
        for t in 0..=18 {
            assert_eq!(node_budget(t, &p64).unwrap(), node_budget(t, &p32).unwrap());
        }
    }
}
