use dmol_core::analysis::{digress_transition, efficiency_ratio};
use dmol_core::graph::{
    apply_permutation, hamming_edges, hamming_nodes, pair_count, random_graph, splice, ClassVocab,
    Graph, GraphJson, Permutation, SelectionMask,
};
use dmol_core::loss::{total_loss, LossConfig, MseReference, Prediction};
use dmol_core::noise::{
    build_transitions, forward_noise, forward_noise_scoped, terminal_marginals, EdgeScope,
    Marginals,
};
use dmol_core::schedule::{edge_budget, node_budget, step_budget, ScheduleParams};
use ndarray::{Array2, Array3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn distribution(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn marginal_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(|v| distribution(&v))
}

fn graph_from_seed(n: usize, seed: u64) -> Graph {
    let vocab = ClassVocab::new(4, 4, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_graph(n, &vocab, 0.3, &mut rng)
}

fn random_prediction(n: usize, a: usize, b: usize, rng: &mut ChaCha8Rng) -> Prediction<f64> {
    let mut x = Array2::from_shape_fn((n, a), |_| rng.random::<f64>() + 0.01);
    for mut row in x.rows_mut() {
        let s = row.sum();
        row /= s;
    }
    let mut e = Array3::zeros((n, n, b));
    for i in 0..n {
        for j in (i + 1)..n {
            let w: Vec<f64> = (0..b).map(|_| rng.random::<f64>() + 0.01).collect();
            let s: f64 = w.iter().sum();
            for c in 0..b {
                e[[i, j, c]] = w[c] / s;
                e[[j, i, c]] = w[c] / s;
            }
        }
        // diagonal rows are never scored but must still be distributions
        e[[i, i, 0]] = 1.0;
    }
    Prediction::new(x, e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_round_trip(n in 1usize..10, seed in any::<u64>()) {
        let g = graph_from_seed(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let p = Permutation::random(n, &mut rng);
        let back = apply_permutation(&apply_permutation(&g, &p).unwrap(), &p.inverse()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn permutation_preserves_hamming(n in 1usize..10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = graph_from_seed(n, s1);
        let b = graph_from_seed(n, s2);
        let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2);
        let p = Permutation::random(n, &mut rng);
        let pa = apply_permutation(&a, &p).unwrap();
        let pb = apply_permutation(&b, &p).unwrap();
        prop_assert_eq!(hamming_nodes(&a, &b).unwrap(), hamming_nodes(&pa, &pb).unwrap());
        prop_assert_eq!(hamming_edges(&a, &b).unwrap(), hamming_edges(&pa, &pb).unwrap());
    }

    #[test]
    fn json_round_trip(n in 1usize..10, seed in any::<u64>()) {
        let g = graph_from_seed(n, seed);
        let text = serde_json::to_string(&GraphJson::from_graph(&g)).unwrap();
        let back: GraphJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.into_graph(0).unwrap(), g);
    }

    #[test]
    fn splice_touches_only_masked_slots(n in 2usize..10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let base = graph_from_seed(n, s1);
        let source = graph_from_seed(n, s2);
        let mut rng = ChaCha8Rng::seed_from_u64(s1.wrapping_add(s2));
        let k = rng.random_range(0..=n);
        let nodes = rand::seq::index::sample(&mut rng, n, k).into_vec();
        let pool = dmol_core::graph::induced_pairs(&nodes);
        let take = rng.random_range(0..=pool.len());
        let mask = SelectionMask::new(nodes.clone(), pool[..take].to_vec()).unwrap();
        let out = splice(&base, &source, &mask).unwrap();
        for i in 0..n {
            let expect = if nodes.contains(&i) { source.node(i) } else { base.node(i) };
            prop_assert_eq!(out.node(i), expect);
        }
        for (i, j) in base.pairs() {
            let hit = pool[..take].contains(&(i, j));
            let expect = if hit { source.edge(i, j) } else { base.edge(i, j) };
            prop_assert_eq!(out.edge(i, j), expect);
        }
    }

    #[test]
    fn budgets_are_monotone_and_bounded(
        n in 1usize..40,
        k in 1usize..5,
        r in 0.01f64..1.0,
        c in 0.001f64..0.1,
    ) {
        let p = ScheduleParams::new(k, r, c, n).unwrap();
        let mut prev = (0, 0);
        for t in 0..=p.total_steps() {
            let nodes = node_budget(t, &p).unwrap();
            let edges = edge_budget(t, &p).unwrap();
            prop_assert!(nodes >= prev.0 && edges >= prev.1);
            prop_assert!(nodes <= n && edges <= pair_count(nodes));
            let b = step_budget(t, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&b.rx) && (0.0..=1.0).contains(&b.re));
            prev = (nodes, edges);
        }
        prop_assert_eq!(prev.0, n);
    }

    #[test]
    fn forward_noise_hits_budgets(
        n in 1usize..13,
        seed in any::<u64>(),
        whole in any::<bool>(),
        node in marginal_strategy(4),
        edge in marginal_strategy(4),
    ) {
        let m = Marginals::new(node, edge).unwrap();
        let q = build_transitions(&m).unwrap();
        let p = ScheduleParams::new(2, 0.2, 0.008, n).unwrap();
        let g0 = graph_from_seed(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = rng.random_range(0..=p.total_steps());
        let scope = if whole { EdgeScope::WholeGraph } else { EdgeScope::Induced };
        let (g, mask) = forward_noise_scoped(&g0, t, &p, &q, scope, &mut rng).unwrap();
        prop_assert_eq!(hamming_nodes(&g0, &g).unwrap(), node_budget(t, &p).unwrap());
        prop_assert_eq!(hamming_edges(&g0, &g).unwrap(), edge_budget(t, &p).unwrap());
        if !whole {
            prop_assert!(mask.is_induced());
        }
    }

    #[test]
    fn transitions_are_zero_diagonal_and_stochastic(p in marginal_strategy(5)) {
        let m = Marginals::new(p.clone(), p).unwrap();
        let q = build_transitions(&m).unwrap();
        for i in 0..5 {
            prop_assert_eq!(q.qx.get(i, i), 0.0);
            prop_assert!((q.qx.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn terminal_marginals_are_distributions(
        node in marginal_strategy(4),
        edge in marginal_strategy(3),
        r in 0.01f64..1.0,
    ) {
        let tm = terminal_marginals(&Marginals::new(node, edge).unwrap(), r).unwrap();
        prop_assert!((tm.node.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!((tm.edge.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn efficiency_ratio_exceeds_one(p in marginal_strategy(6)) {
        prop_assert!(efficiency_ratio(&p).unwrap() > 1.0);
    }

    #[test]
    fn digress_rows_are_stochastic(a in 0.0f64..=1.0, p in marginal_strategy(4)) {
        let q = digress_transition(a, &p).unwrap();
        for i in 0..4 {
            prop_assert!((q.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // m is a fixed point of every such matrix
        for j in 0..4 {
            let v: f64 = (0..4).map(|i| p[i] * q.get(i, j)).sum();
            prop_assert!((v - p[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn total_loss_is_permutation_invariant(
        n in 1usize..9,
        seed in any::<u64>(),
        clean_ref in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pred = random_prediction(n, 4, 4, &mut rng);
        let clean = graph_from_seed(n, seed ^ 7);
        let noisy = graph_from_seed(n, seed ^ 13);
        let p = ScheduleParams::new(2, 0.2, 0.008, n).unwrap();
        let budget = step_budget(rng.random_range(0..=p.total_steps()), &p).unwrap();
        let cfg = LossConfig {
            mse_reference: if clean_ref { MseReference::Clean } else { MseReference::Noisy },
            ..LossConfig::default()
        };
        let perm = Permutation::random(n, &mut rng);
        let before = total_loss(&pred, &clean, &noisy, &budget, &cfg).unwrap();
        let after = total_loss(
            &pred.permute(&perm).unwrap(),
            &apply_permutation(&clean, &perm).unwrap(),
            &apply_permutation(&noisy, &perm).unwrap(),
            &budget,
            &cfg,
        )
        .unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
    }
}

#[test]
fn forward_noise_is_seed_deterministic() {
    let m = Marginals::<f64>::new(vec![0.5, 0.3, 0.2], vec![0.8, 0.15, 0.05]).unwrap();
    let q = build_transitions(&m).unwrap();
    let p = ScheduleParams::new(2, 0.2, 0.008, 9).unwrap();
    let vocab = ClassVocab::new(3, 3, 0).unwrap();
    let g0 = random_graph(9, &vocab, 0.3, &mut ChaCha8Rng::seed_from_u64(3));
    let a = forward_noise(&g0, 11, &p, &q, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let b = forward_noise(&g0, 11, &p, &q, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(a, b);
}
