//! A kekulized SMILES subset: organic-subset atoms from the vocabulary,
//! branches, ring-closure digits 1–9 and the bond symbols `-`, `=`, `#`.

use dmol_core::Graph;

use crate::error::{ChemError, Result};
use crate::vocab::{bond_symbol, AtomVocab, DOUBLE, NO_BOND, SINGLE, TRIPLE};

fn parse_error(pos: usize, message: impl Into<String>) -> ChemError {
    ChemError::Parse {
        pos,
        message: message.into(),
    }
}

struct OpenRing {
    atom: usize,
    bond: Option<usize>,
    pos: usize,
}

/// Parses one molecule into a heavy-atom graph; hydrogens stay implicit.
pub fn parse_smiles(text: &str, vocab: &AtomVocab) -> Result<Graph> {
    let mut nodes: Vec<usize> = Vec::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut branches: Vec<(usize, usize)> = Vec::new();
    let mut pending: Option<(usize, usize)> = None;
    let mut rings: [Option<OpenRing>; 10] = Default::default();
    let bytes = text.as_bytes();
    let mut pos = 0;
    let bonded = |edges: &[(usize, usize, usize)], a: usize, b: usize| {
        edges
            .iter()
            .any(|&(i, j, _)| (i, j) == (a, b) || (i, j) == (b, a))
    };

    while pos < bytes.len() {
        let c = bytes[pos] as char;
        match c {
            'A'..='Z' => {
                let (class, len) = vocab
                    .match_prefix(&text[pos..])
                    .ok_or_else(|| parse_error(pos, format!("unknown atom starting with {c:?}")))?;
                let atom = nodes.len();
                nodes.push(class);
                match prev {
                    Some(p) => {
                        let bond = pending.take().map_or(SINGLE, |b| b.0);
                        edges.push((p, atom, bond));
                    }
                    None if pending.is_some() => {
                        let (_, at) = pending.expect("checked");
                        return Err(parse_error(at, "bond before the first atom"));
                    }
                    None => {}
                }
                prev = Some(atom);
                pos += len;
                continue;
            }
            'a'..='z' => return Err(parse_error(pos, "aromatic atoms are not supported")),
            '[' => return Err(parse_error(pos, "bracket atoms are not supported")),
            '(' => {
                let p = prev.ok_or_else(|| parse_error(pos, "branch before any atom"))?;
                if pending.is_some() {
                    return Err(parse_error(pos, "bond symbol before a branch"));
                }
                if pos + 1 < bytes.len() && bytes[pos + 1] == b')' {
                    return Err(parse_error(pos, "empty branch"));
                }
                branches.push((p, pos));
            }
            ')' => {
                let (p, _) = branches
                    .pop()
                    .ok_or_else(|| parse_error(pos, "unbalanced ')'"))?;
                if pending.is_some() {
                    return Err(parse_error(pos, "dangling bond symbol"));
                }
                prev = Some(p);
            }
            '-' | '=' | '#' => {
                if pending.is_some() {
                    return Err(parse_error(pos, "two consecutive bond symbols"));
                }
                let class = match c {
                    '-' => SINGLE,
                    '=' => DOUBLE,
                    _ => TRIPLE,
                };
                pending = Some((class, pos));
            }
            '1'..='9' => {
                let p = prev.ok_or_else(|| parse_error(pos, "ring digit before any atom"))?;
                let digit = (bytes[pos] - b'0') as usize;
                let bond = pending.take().map(|b| b.0);
                match rings[digit].take() {
                    None => {
                        rings[digit] = Some(OpenRing { atom: p, bond, pos });
                    }
                    Some(open) => {
                        let class = match (open.bond, bond) {
                            (Some(x), Some(y)) if x != y => {
                                return Err(parse_error(pos, "conflicting ring-closure bonds"));
                            }
                            (Some(x), _) | (_, Some(x)) => x,
                            _ => SINGLE,
                        };
                        if open.atom == p || bonded(&edges, open.atom, p) {
                            return Err(parse_error(pos, "ring closure duplicates a bond"));
                        }
                        edges.push((open.atom, p, class));
                    }
                }
            }
            '0' | '%' => return Err(parse_error(pos, "only ring digits 1-9 are supported")),
            '.' => return Err(parse_error(pos, "multi-component SMILES are not supported")),
            '/' | '\\' | '@' => return Err(parse_error(pos, "stereochemistry is not supported")),
            _ => return Err(parse_error(pos, format!("unsupported character {c:?}"))),
        }
        pos += c.len_utf8();
    }
    if let Some(&(_, p)) = branches.last() {
        return Err(parse_error(p, "unbalanced '('"));
    }
    if let Some(open) = rings.iter().flatten().next() {
        return Err(parse_error(open.pos, "unclosed ring"));
    }
    if let Some((_, p)) = pending {
        return Err(parse_error(p, "dangling bond symbol"));
    }
    if nodes.is_empty() {
        return Err(parse_error(0, "no atoms"));
    }
    Ok(Graph::from_edges(nodes, &edges, NO_BOND)?)
}

/// Writes a connected graph by depth-first search from atom 0, visiting
/// neighbours in index order. Ring-closure bond symbols go on the opening digit.
pub fn write_smiles(g: &Graph, vocab: &AtomVocab) -> Result<String> {
    let n = g.n();
    if n == 0 {
        return Err(ChemError::Empty);
    }
    for &c in g.nodes() {
        if c >= vocab.len() {
            return Err(ChemError::UnknownClass {
                what: "atom",
                class: c,
            });
        }
    }
    if let Some(&(_, _, c)) = g.edge_list().iter().find(|e| e.2 > TRIPLE) {
        return Err(ChemError::UnknownClass {
            what: "bond",
            class: c,
        });
    }

    if !g.is_connected() {
        return Err(ChemError::Disconnected);
    }
    let mut order = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closures: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut counter = 0;
    dfs_tree(g, 0, &mut order, &mut children, &mut counter);
    for (i, j) in g.pairs() {
        if !g.has_edge(i, j) || children[i].contains(&j) || children[j].contains(&i) {
            continue;
        }
        let (open, close) = if order[i] < order[j] { (i, j) } else { (j, i) };
        closures[open].push((close, g.edge(i, j)));
        closures[close].push((open, g.edge(i, j)));
    }

    let mut out = String::new();
    let mut digits: [Option<(usize, usize)>; 10] = [None; 10];
    emit(
        g,
        vocab,
        0,
        &order,
        &children,
        &closures,
        &mut digits,
        &mut out,
    )?;
    Ok(out)
}

fn dfs_tree(
    g: &Graph,
    u: usize,
    order: &mut [usize],
    children: &mut [Vec<usize>],
    counter: &mut usize,
) {
    order[u] = *counter;
    *counter += 1;
    let nbrs: Vec<usize> = g.neighbors(u).map(|(v, _)| v).collect();
    for v in nbrs {
        if order[v] == usize::MAX {
            children[u].push(v);
            dfs_tree(g, v, order, children, counter);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn emit(
    g: &Graph,
    vocab: &AtomVocab,
    u: usize,
    order: &[usize],
    children: &[Vec<usize>],
    closures: &[Vec<(usize, usize)>],
    digits: &mut [Option<(usize, usize)>; 10],
    out: &mut String,
) -> Result<()> {
    out.push_str(vocab.symbol(g.node(u)).expect("checked class"));
    // close rings opened by earlier atoms, then open new ones
    for &(other, _) in closures[u].iter().filter(|(v, _)| order[*v] < order[u]) {
        let d = (1..10)
            .find(|&d| digits[d] == Some((other, u)))
            .expect("ring was opened");
        digits[d] = None;
        out.push_str(&d.to_string());
    }
    for &(other, bond) in closures[u].iter().filter(|(v, _)| order[*v] > order[u]) {
        let d = (1..10)
            .find(|&d| digits[d].is_none())
            .ok_or(ChemError::TooManyOpenRings)?;
        digits[d] = Some((u, other));
        out.push_str(bond_symbol(bond));
        out.push_str(&d.to_string());
    }
    let kids = &children[u];
    for (k, &v) in kids.iter().enumerate() {
        let last = k + 1 == kids.len();
        if !last {
            out.push('(');
        }
        out.push_str(bond_symbol(g.edge(u, v)));
        emit(g, vocab, v, order, children, closures, digits, out)?;
        if !last {
            out.push(')');
        }
    }
    Ok(())
}
