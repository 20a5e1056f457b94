//! Isomorphism-invariant canonical form and digest.
//!
//! Colour refinement over (node class, multiset of (bond class, neighbour
//! colour)) is followed by individualisation-refinement search for the
//! lexicographically smallest encoding among all discrete leaf colourings.
//! Interchangeable twins are branched on once.

use dmol_core::Graph;
use sha2::{Digest, Sha256};

/// Refines `colors` to the coarsest equitable colouring below it. Colours are
/// dense ranks and the relative order of existing colours is preserved, so
/// the result depends only on the input colouring, never on node labels.
fn refine(g: &Graph, colors: &mut Vec<usize>) {
    let n = g.n();
    let mut count = distinct(colors);
    loop {
        let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..n)
            .map(|u| {
                let mut nb: Vec<(usize, usize)> =
                    g.neighbors(u).map(|(v, b)| (b, colors[v])).collect();
                nb.sort_unstable();
                (colors[u], nb)
            })
            .collect();
        let mut sorted: Vec<&(usize, Vec<(usize, usize)>)> = sigs.iter().collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| sorted.binary_search(&s).expect("signature present"))
            .collect();
        let next_count = sorted.len();
        *colors = next;
        if next_count == count {
            return;
        }
        count = next_count;
    }
}

fn distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// `twin[u]` is the smallest node interchangeable with `u`: same class and
/// identical bonds to every third node.
fn twin_classes(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut rep: Vec<usize> = (0..n).collect();
    for u in 0..n {
        if rep[u] != u {
            continue;
        }
        for v in (u + 1)..n {
            if rep[v] == v
                && g.node(u) == g.node(v)
                && (0..n).all(|w| w == u || w == v || g.edge(u, w) == g.edge(v, w))
            {
                rep[v] = u;
            }
        }
    }
    rep
}

/// Adjacency encoding under the ordering given by a discrete colouring.
fn encode(g: &Graph, colors: &[usize]) -> Vec<u32> {
    let n = g.n();
    let mut at = vec![0; n];
    for (u, &c) in colors.iter().enumerate() {
        at[c] = u;
    }
    let mut code = Vec::with_capacity(1 + n + n * (n - 1) / 2);
    code.push(n as u32);
    code.extend(at.iter().map(|&u| g.node(u) as u32));
    for a in 0..n {
        for b in (a + 1)..n {
            code.push(g.edge(at[a], at[b]) as u32);
        }
    }
    code
}

fn search(g: &Graph, colors: Vec<usize>, twins: &[usize], best: &mut Option<Vec<u32>>) {
    let n = g.n();
    // first (smallest-colour) non-singleton cell
    let mut sizes = vec![0usize; n];
    for &c in &colors {
        sizes[c] += 1;
    }
    let target = match (0..n).find(|&c| sizes[c] > 1) {
        None => {
            let code = encode(g, &colors);
            if best.as_ref().is_none_or(|b| code < *b) {
                *best = Some(code);
            }
            return;
        }
        Some(c) => c,
    };
    let mut tried: Vec<usize> = Vec::new();
    for v in (0..n).filter(|&v| colors[v] == target) {
        if tried.contains(&twins[v]) {
            continue;
        }
        tried.push(twins[v]);
        let mut next: Vec<usize> = colors
            .iter()
            .enumerate()
            .map(|(u, &c)| if u == v { 2 * c } else { 2 * c + 1 })
            .collect();
        refine(g, &mut next);
        search(g, next, twins, best);
    }
}

/// Canonical adjacency encoding: equal for two graphs iff they are isomorphic.
pub fn canonical_form(g: &Graph) -> Vec<u32> {
    if g.n() == 0 {
        return vec![0];
    }
    let mut colors: Vec<usize> = g.nodes().to_vec();
    refine(g, &mut colors);
    let twins = twin_classes(g);
    let mut best = None;
    search(g, colors, &twins, &mut best);
    best.expect("search reaches at least one leaf")
}

/// Hex SHA-256 of the canonical form.
pub fn canonical_hash(g: &Graph) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"dmol-canon-v1");
    for x in canonical_form(g) {
        hasher.update(x.to_le_bytes());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
