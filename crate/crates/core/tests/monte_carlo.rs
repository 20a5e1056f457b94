//! Seeded Monte-Carlo checks of closed-form expectations.

use dmol_core::analysis::{
    change_probability, compat_forward, dmol_drift, hamming_curves, stationarity_check,
    DigressCompatConfig,
};
use dmol_core::graph::{hamming_nodes, Graph};
use dmol_core::noise::{
    build_transitions, forward_noise, sample_independent, terminal_marginals, Marginals,
};
use dmol_core::sampler::sample_terminal;
use dmol_core::schedule::{alpha, ScheduleParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn within_sigma(observed: f64, expected: f64, std_error: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * std_error.max(1e-12)
}

#[test]
fn terminal_frequencies_match_closed_form() {
    let m = Marginals::<f64>::new(vec![0.55, 0.25, 0.15, 0.05], vec![0.85, 0.1, 0.05]).unwrap();
    let q = build_transitions(&m).unwrap();
    // r·C(11, 2) = 11 exactly, so the terminal edge fraction is exactly r
    let p = ScheduleParams::new(2, 0.2, 0.008, 11).unwrap();
    let tm = terminal_marginals(&m, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut nodes = vec![0u64; 4];
    let mut edges = vec![0u64; 3];
    let (mut n_nodes, mut n_pairs) = (0u64, 0u64);
    while n_nodes < 100_000 || n_pairs < 100_000 {
        let g0 = sample_independent(11, &m.node, &m.edge, 0, &mut rng);
        let (g, _) = forward_noise(&g0, p.total_steps(), &p, &q, &mut rng).unwrap();
        if n_nodes < 100_000 {
            g.nodes().iter().for_each(|&c| nodes[c] += 1);
            n_nodes += 11;
        }
        if n_pairs < 100_000 {
            g.pairs().for_each(|(i, j)| edges[g.edge(i, j)] += 1);
            n_pairs += 55;
        }
    }
    for (counts, probs, total) in [(&nodes, &tm.node, n_nodes), (&edges, &tm.edge, n_pairs)] {
        for (&c, &p) in counts.iter().zip(probs) {
            let f = c as f64 / total as f64;
            let se = (p * (1.0 - p) / total as f64).sqrt();
            assert!(within_sigma(f, p, se, 3.0), "{f} vs {p} (se {se})");
        }
    }
}

#[test]
fn terminal_sampler_frequencies() {
    let tm = dmol_core::noise::TerminalMarginals {
        node: vec![0.6, 0.3, 0.1],
        edge: vec![0.9, 0.1],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0u64; 3];
    for _ in 0..10_000 {
        let g = sample_terminal(10, &tm, 0, &mut rng);
        g.nodes().iter().for_each(|&c| counts[c] += 1);
    }
    for (c, p) in counts.iter().zip(&tm.node) {
        let f = *c as f64 / 100_000.0;
        assert!(within_sigma(f, *p, (p * (1.0 - p) / 100_000.0).sqrt(), 3.0));
    }
}

/// 20 nodes whose class composition is exactly `[10, 6, 4]` and 190 pairs of
/// which exactly 38 are bonds, matching the marginals below.
fn matched_graph() -> (Graph, Marginals<f64>) {
    let mut nodes = vec![0; 10];
    nodes.extend([1; 6]);
    nodes.extend([2; 4]);
    let mut g = Graph::empty(nodes, 0);
    let mut placed = 0;
    'outer: for i in 0..20 {
        for j in (i + 1)..20 {
            if (i + j) % 5 == 0 {
                g.set_edge(i, j, 1);
                placed += 1;
                if placed == 38 {
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(placed, 38);
    let m = Marginals::new(vec![0.5, 0.3, 0.2], vec![0.8, 0.2]).unwrap();
    (g, m)
}

#[test]
fn compat_forward_matches_redraw_expectations() {
    let (g0, m) = matched_graph();
    let q = build_transitions(&m).unwrap();
    let fixed = 50;
    let compat = DigressCompatConfig::from_marginals(&m, 0.2, fixed).unwrap();
    let params = ScheduleParams::new(2, 0.2, 0.008, 20).unwrap();
    let fixed_params = ScheduleParams::with_total_steps(0.2, 0.008, 20, fixed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 10_000;
    for t in [5, 20, 35, 50] {
        let beta = 1.0 - alpha(t, &fixed_params).unwrap();
        let mut changed = Vec::with_capacity(trials);
        let mut by_class = [0u64; 3];
        let mut edge_changes = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (g, _) = compat_forward(&g0, t, &params, &compat, &q, &mut rng).unwrap();
            changed.push(hamming_nodes(&g0, &g).unwrap() as f64);
            for i in 0..20 {
                if g.node(i) != g0.node(i) {
                    by_class[g0.node(i)] += 1;
                }
            }
            edge_changes.push(dmol_core::graph::hamming_edges(&g0, &g).unwrap() as f64);
        }
        let check = |xs: &[f64], expected: f64, what: &str| {
            let k = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / k;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
            let se = (var / k).sqrt();
            assert!(
                within_sigma(mean, expected, se, 3.0),
                "t={t} {what}: {mean} vs {expected} (se {se})"
            );
        };
        check(&changed, 20.0 * beta * change_probability(&m.node), "nodes");
        check(
            &edge_changes,
            190.0 * beta * change_probability(&m.edge),
            "edges",
        );
        // share of class i among changed nodes is proportional to p_i (1 − p_i)
        let total: u64 = by_class.iter().sum();
        if total > 0 {
            let s = change_probability(&m.node);
            for (i, &c) in by_class.iter().enumerate() {
                let p = m.node[i] * (1.0 - m.node[i]) / s;
                let f = c as f64 / total as f64;
                let se = (p * (1.0 - p) / total as f64).sqrt();
                assert!(within_sigma(f, p, se, 3.0), "t={t} class {i}: {f} vs {p}");
            }
        }
    }
}

#[test]
fn hamming_curves_follow_closed_forms() {
    let m =
        Marginals::<f64>::new(vec![0.72, 0.12, 0.15, 0.01], vec![0.9, 0.07, 0.02, 0.01]).unwrap();
    let q = build_transitions(&m).unwrap();
    let params = ScheduleParams::new(2, 0.2, 0.008, 9).unwrap();
    let curves = hamming_curves(&m, &params, &q, 2_000, 21).unwrap();
    let s = curves.node_change_probability;
    assert!(s <= 0.5);
    let first = &curves.rows[0];
    assert_eq!(
        (first.dmol_nodes.mean, first.digress_nodes.mean),
        (0.0, 0.0)
    );
    assert_eq!(curves.rows.last().unwrap().dmol_nodes.mean, 9.0);
    let mut started = false;
    for row in &curves.rows {
        // below ~0.1 expected changes per graph the normal approximation is meaningless
        let expected = 9.0 * row.beta_bar * s;
        if let Some(ratio) = row.node_ratio.filter(|_| expected >= 0.1) {
            assert!(
                within_sigma(ratio.mean, s, ratio.std_error, 3.0),
                "t={}: {ratio:?}",
                row.t
            );
        }
        started |= row.dmol_nodes.mean > 0.0;
        if started {
            assert!(row.dmol_nodes.mean >= row.digress_nodes.mean, "t={}", row.t);
        }
    }
}

#[test]
fn redraw_chains_stay_at_the_marginal() {
    let r = stationarity_check(&[0.5, 0.3, 0.2], 20, 0.008, 100_000, 4).unwrap();
    assert!(r.max_deviation < 0.01, "{r:?}");
}

#[test]
fn budgeted_chains_drift_towards_terminal() {
    let m = Marginals::<f64>::new(vec![0.5, 0.3, 0.2], vec![0.8, 0.2]).unwrap();
    let q = build_transitions(&m).unwrap();
    let params = ScheduleParams::new(2, 0.2, 0.008, 10).unwrap();
    let r = dmol_drift(&m, &params, &q, 5_000, 5).unwrap();
    let tm = terminal_marginals(&m, 0.2).unwrap();
    let gap = tm
        .node
        .iter()
        .zip(&m.node)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let last = *r.deviations.last().unwrap();
    assert!(r.deviations[0] < 4.0 * r.std_error);
    assert!(last > 10.0 * r.std_error);
    assert!(within_sigma(last, gap, r.std_error, 4.0), "{last} vs {gap}");
}
