//! Every small graph: canonical forms are constant on isomorphism classes
//! and there are exactly as many forms as classes (Burnside count).

use std::collections::HashSet;

use dmol_chem::canonical_form;
use dmol_core::graph::{all_pairs, apply_permutation, Graph, Permutation};
use rayon::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..n {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

fn cycles<T: Copy + Eq + std::hash::Hash>(items: &[T], f: impl Fn(T) -> T) -> u32 {
    let mut seen = HashSet::new();
    let mut count = 0;
    for &x in items {
        if seen.contains(&x) {
            continue;
        }
        count += 1;
        let mut y = x;
        while seen.insert(y) {
            y = f(y);
        }
    }
    count
}

fn orbit_count(n: usize, node_classes: u64, edge_classes: u64) -> u64 {
    let verts: Vec<usize> = (0..n).collect();
    let pairs: Vec<(usize, usize)> = all_pairs(n).collect();
    let perms = permutations(n);
    let fixed: u64 = perms
        .iter()
        .map(|p| {
            let cv = cycles(&verts, |v| p[v]);
            let cp = cycles(&pairs, |(i, j)| (p[i].min(p[j]), p[i].max(p[j])));
            node_classes.pow(cv) * edge_classes.pow(cp)
        })
        .sum();
    fixed / perms.len() as u64
}

fn graph_from_code(n: usize, mut code: u64, node_classes: u64, edge_classes: u64) -> Graph {
    let nodes = (0..n)
        .map(|_| {
            let c = code % node_classes;
            code /= node_classes;
            c as usize
        })
        .collect();
    let mut g = Graph::empty(nodes, 0);
    for (i, j) in all_pairs(n) {
        g.set_edge(i, j, (code % edge_classes) as usize);
        code /= edge_classes;
    }
    g
}

fn check(n: usize, node_classes: u64, edge_classes: u64) {
    let total = node_classes.pow(n as u32) * edge_classes.pow((n * (n - 1) / 2) as u32);
    // a transposition and an n-cycle generate every relabelling
    let generators: Vec<Permutation> = if n >= 2 {
        vec![
            Permutation::new((0..n).map(|i| if i < 2 { 1 - i } else { i }).collect()).unwrap(),
            Permutation::new((0..n).map(|i| (i + 1) % n).collect()).unwrap(),
        ]
    } else {
        Vec::new()
    };
    let forms: HashSet<Vec<u32>> = (0..total)
        .into_par_iter()
        .map(|code| {
            let g = graph_from_code(n, code, node_classes, edge_classes);
            let f = canonical_form(&g);
            for p in &generators {
                let h = apply_permutation(&g, p).unwrap();
                assert_eq!(canonical_form(&h), f, "n={n} code={code}");
            }
            f
        })
        .collect();
    assert_eq!(
        forms.len() as u64,
        orbit_count(n, node_classes, edge_classes),
        "n={n}"
    );
}

#[test]
fn burnside_counts_match_two_edge_classes() {
    for n in 1..=6 {
        check(n, 2, 2);
    }
}

#[test]
fn burnside_counts_match_three_edge_classes() {
    for n in 1..=5 {
        check(n, 2, 3);
    }
}

#[test]
fn known_orbit_counts() {
    // unlabelled simple graphs on 4 and 5 vertices
    assert_eq!(orbit_count(4, 1, 2), 11);
    assert_eq!(orbit_count(5, 1, 2), 34);
}
