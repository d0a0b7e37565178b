//! Moving half of each split vertex's edges between two matchings so that
//! neither part sees both copies of a vertex.

use std::collections::{BTreeMap, BTreeSet};

use crate::digraph::Vertex;
use crate::error::{Error, Result};

/// A vertex of the split graph: untouched, or one of the two copies of a
/// heavy vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    V(Vertex),
    W1(Vertex),
    W2(Vertex),
}

impl Node {
    pub fn vertex(self) -> Vertex {
        match self {
            Node::V(x) | Node::W1(x) | Node::W2(x) => x,
        }
    }

    fn split(self) -> Option<Vertex> {
        match self {
            Node::V(_) => None,
            Node::W1(x) | Node::W2(x) => Some(x),
        }
    }
}

/// An undirected edge of the split graph.
pub type NodeEdge = (Node, Node);

fn touches(e: &NodeEdge, n: Node) -> bool {
    e.0 == n || e.1 == n
}

fn check_hypotheses(m1: &[NodeEdge], m2: &[NodeEdge]) -> Result<()> {
    if m1.len() != m2.len() {
        return Err(Error::invalid(format!("matchings have sizes {} and {}", m1.len(), m2.len())));
    }
    let mut plain = BTreeSet::new();
    let mut split = BTreeSet::new();
    for (k, m) in [m1, m2].into_iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &(a, b) in m {
            if a == b || !seen.insert(a) || !seen.insert(b) {
                return Err(Error::invalid(format!("M{} is not a matching at {a:?}/{b:?}", k + 1)));
            }
            if matches!((a, b), (Node::W2(_), Node::W1(_) | Node::W2(_)) | (Node::W1(_), Node::W2(_))) {
                return Err(Error::invalid(format!("edge {a:?}{b:?} joins W2 to W1 or W2")));
            }
            for n in [a, b] {
                match n.split() {
                    Some(x) => split.insert(x),
                    None => plain.insert(n.vertex()),
                };
            }
        }
    }
    if let Some(x) = plain.intersection(&split).next() {
        return Err(Error::invalid(format!("vertex {x} occurs both plain and split")));
    }
    Ok(())
}

/// `(X, Y, Z)` for one matching: split vertices with both copies covered,
/// those whose first copy is matched to another such first copy, and the rest.
fn classify(m: &[NodeEdge]) -> (BTreeSet<Vertex>, BTreeSet<Vertex>, BTreeSet<Vertex>) {
    let covered: BTreeSet<Node> = m.iter().flat_map(|&(a, b)| [a, b]).collect();
    let x: BTreeSet<Vertex> = covered
        .iter()
        .filter_map(|n| match n {
            Node::W1(w) if covered.contains(&Node::W2(*w)) => Some(*w),
            _ => None,
        })
        .collect();
    let partner: BTreeMap<Node, Node> = m.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    let y: BTreeSet<Vertex> = x
        .iter()
        .copied()
        .filter(|&w| matches!(partner[&Node::W1(w)], Node::W1(v) if x.contains(&v)))
        .collect();
    let z = x.difference(&y).copied().collect();
    (x, y, z)
}

fn edge_at(m: &[NodeEdge], n: Node) -> NodeEdge {
    *m.iter().find(|e| touches(e, n)).expect("node is covered")
}

fn at_second_copies(m: &[NodeEdge], x: &BTreeSet<Vertex>) -> Vec<NodeEdge> {
    m.iter().copied().filter(|&(a, b)| [a, b].iter().any(|n| matches!(n, Node::W2(w) if x.contains(w)))).collect()
}

fn avoiding(m: &[NodeEdge], x: &BTreeSet<Vertex>, k: usize) -> Vec<NodeEdge> {
    m.iter().copied().filter(|&(a, b)| [a, b].iter().all(|n| n.split().is_none_or(|w| !x.contains(&w)))).take(k).collect()
}

/// Subsets `M1′ ⊆ M1`, `M2′ ⊆ M2` of equal size such that one of them lies
/// entirely on second copies and no part sees both copies of a vertex.
pub fn move_degree2(m1: &[NodeEdge], m2: &[NodeEdge]) -> Result<(Vec<NodeEdge>, Vec<NodeEdge>)> {
    check_hypotheses(m1, m2)?;
    let mut cur = [m1.to_vec(), m2.to_vec()];
    for m in cur.iter_mut() {
        m.sort_unstable();
    }
    let mut keep: [Vec<NodeEdge>; 2] = [Vec::new(), Vec::new()];
    loop {
        if cur[0].len() <= 1 {
            break;
        }
        let c = [classify(&cur[0]), classify(&cur[1])];
        if c[0].0.is_empty() && c[1].0.is_empty() {
            break;
        }
        if !c[0].1.is_empty() && !c[1].1.is_empty() {
            for i in 0..2 {
                let w = *c[i].1.iter().next().unwrap();
                let pair = edge_at(&cur[i], Node::W1(w));
                let v = if pair.0 == Node::W1(w) { pair.1 } else { pair.0 }.vertex();
                let e = edge_at(&cur[i], Node::W2(v));
                let e2 = edge_at(&cur[i], Node::W2(w));
                cur[i].retain(|x| *x != pair && *x != e && *x != e2);
                keep[i].extend([e, e2]);
            }
            continue;
        }
        if !c[0].2.is_empty() && !c[1].2.is_empty() {
            for i in 0..2 {
                let w = *c[i].2.iter().next().unwrap();
                let e1 = edge_at(&cur[i], Node::W1(w));
                let e2 = edge_at(&cur[i], Node::W2(w));
                cur[i].retain(|x| *x != e1 && *x != e2);
                keep[i].push(e2);
            }
            continue;
        }
        let y = c[0].1.len().max(c[1].1.len());
        let z = c[0].2.len().max(c[1].2.len());
        let finish: [Vec<NodeEdge>; 2] = if let Some(p) = (0..2).find(|&i| c[i].0.is_empty()) {
            let q = 1 - p;
            let mut out: [Vec<NodeEdge>; 2] = Default::default();
            out[p] = cur[p].iter().copied().take(y + z).collect();
            out[q] = at_second_copies(&cur[q], &c[q].0);
            out
        } else {
            let p = if c[0].1.is_empty() { 1 } else { 0 };
            let q = 1 - p;
            let mut out: [Vec<NodeEdge>; 2] = Default::default();
            if z >= y {
                out[p] = at_second_copies(&cur[p], &c[p].0);
                out[p].extend(avoiding(&cur[p], &c[p].0, z - y));
                out[q] = at_second_copies(&cur[q], &c[q].0);
            } else if y >= 2 * z {
                out[p] = at_second_copies(&cur[p], &c[p].0);
                out[q] = at_second_copies(&cur[q], &c[q].0);
                out[q].extend(avoiding(&cur[q], &c[q].0, y - z));
            } else {
                let inside: Vec<NodeEdge> = cur[p]
                    .iter()
                    .copied()
                    .filter(|&(a, b)| matches!((a, b), (Node::W1(u), Node::W1(v)) if c[p].1.contains(&u) && c[p].1.contains(&v)))
                    .take(y - z)
                    .collect();
                let moved: BTreeSet<Vertex> = inside.iter().flat_map(|&(a, b)| [a.vertex(), b.vertex()]).collect();
                let rest: BTreeSet<Vertex> = c[p].0.difference(&moved).copied().collect();
                out[p] = inside;
                out[p].extend(at_second_copies(&cur[p], &rest));
                out[q] = at_second_copies(&cur[q], &c[q].0);
            }
            out
        };
        for i in 0..2 {
            keep[i].extend(finish[i].iter().copied());
        }
        break;
    }
    for k in keep.iter_mut() {
        k.sort_unstable();
    }
    let [k1, k2] = keep;
    check_move_degree2(m1, m2, &k1, &k2)?;
    Ok((k1, k2))
}

/// Recounts the three conclusions for a proposed pair `(M1′, M2′)`.
pub fn check_move_degree2(m1: &[NodeEdge], m2: &[NodeEdge], k1: &[NodeEdge], k2: &[NodeEdge]) -> Result<()> {
    let bad = |d: String| Err(Error::invariant("move degree", d));
    if k1.len() != k2.len() {
        return bad(format!("|M1'| = {} but |M2'| = {}", k1.len(), k2.len()));
    }
    let on_w2 = |k: &[NodeEdge]| k.iter().all(|&(a, b)| matches!(a, Node::W2(_)) || matches!(b, Node::W2(_)));
    if !on_w2(k1) && !on_w2(k2) {
        return bad("neither M1' nor M2' lies on second copies".into());
    }
    for (i, (m, k)) in [(m1, k1), (m2, k2)].into_iter().enumerate() {
        let kept: BTreeSet<NodeEdge> = k.iter().copied().collect();
        if kept.len() != k.len() || !kept.iter().all(|e| m.contains(e)) {
            return bad(format!("M{}' is not a subset of M{}", i + 1, i + 1));
        }
        let rest: Vec<NodeEdge> = m.iter().copied().filter(|e| !kept.contains(e)).collect();
        for part in [k, rest.as_slice()] {
            let mut copies: BTreeMap<Vertex, usize> = BTreeMap::new();
            for n in part.iter().flat_map(|&(a, b)| [a, b]) {
                if let Some(w) = n.split() {
                    *copies.entry(w).or_insert(0) += 1;
                }
            }
            if let Some((w, _)) = copies.iter().find(|&(_, &c)| c > 1) {
                return bad(format!("a part of M{} holds both copies of {w}", i + 1));
            }
        }
    }
    Ok(())
}
