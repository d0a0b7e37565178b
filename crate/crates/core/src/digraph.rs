//! Digraphs with labelled vertex classes, plus the instance generators.
//!
//! Vertices are dense ids `0..N`. Every vertex carries a class label in
//! `0..n_classes`; for an even number of classes the even labels form side A
//! and the odd labels side B, so a blow-up of `C_4` on labels 0..3 is bipartite
//! with A = U1 ∪ U3 and B = U2 ∪ U4.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type Arc = (Vertex, Vertex);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    out: Vec<FixedBitSet>,
    inn: Vec<FixedBitSet>,
    class: Vec<usize>,
    n_classes: usize,
}

/// The bipartite case is not a separate type; see [`Digraph::is_bipartite`].
pub type BipartiteDigraph = Digraph;

impl Digraph {
    /// Edgeless digraph with the given class labels.
    pub fn new(class: Vec<usize>, n_classes: usize) -> Result<Self> {
        if let Some(&c) = class.iter().find(|&&c| c >= n_classes) {
            return Err(Error::invalid(format!("class label {c} out of range 0..{n_classes}")));
        }
        let n = class.len();
        Ok(Digraph {
            out: vec![FixedBitSet::with_capacity(n); n],
            inn: vec![FixedBitSet::with_capacity(n); n],
            class,
            n_classes,
        })
    }

    pub fn from_arcs(class: Vec<usize>, n_classes: usize, arcs: &[Arc]) -> Result<Self> {
        let mut d = Digraph::new(class, n_classes)?;
        for &(u, v) in arcs {
            d.add_arc(u, v)?;
        }
        Ok(d)
    }

    /// Same vertices and classes, other arcs.
    pub fn with_arcs(&self, arcs: &[Arc]) -> Result<Self> {
        Digraph::from_arcs(self.class.clone(), self.n_classes, arcs)
    }

    pub fn n(&self) -> usize {
        self.class.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_of(&self, v: Vertex) -> usize {
        self.class[v]
    }

    pub fn classes(&self) -> &[usize] {
        &self.class
    }

    pub fn class_members(&self, c: usize) -> Vec<Vertex> {
        (0..self.n()).filter(|&v| self.class[v] == c).collect()
    }

    pub fn side(&self, v: Vertex) -> Side {
        if self.class[v] % 2 == 0 {
            Side::A
        } else {
            Side::B
        }
    }

    pub fn side_members(&self, s: Side) -> Vec<Vertex> {
        (0..self.n()).filter(|&v| self.side(v) == s).collect()
    }

    pub fn add_arc(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::invalid(format!("arc ({u},{v}) has an endpoint outside 0..{n}")));
        }
        if u == v {
            return Err(Error::invalid(format!("loop at {u}")));
        }
        if self.out[u].contains(v) {
            return Err(Error::invalid(format!("duplicate arc ({u},{v})")));
        }
        self.out[u].insert(v);
        self.inn[v].insert(u);
        Ok(())
    }

    pub fn remove_arc(&mut self, u: Vertex, v: Vertex) -> bool {
        if u < self.n() && v < self.n() && self.out[u].contains(v) {
            self.out[u].set(v, false);
            self.inn[v].set(u, false);
            true
        } else {
            false
        }
    }

    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && v < self.n() && self.out[u].contains(v)
    }

    pub fn out_nbrs(&self, v: Vertex) -> &FixedBitSet {
        &self.out[v]
    }

    pub fn in_nbrs(&self, v: Vertex) -> &FixedBitSet {
        &self.inn[v]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out[v].count_ones(..)
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.inn[v].count_ones(..)
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(|s| s.count_ones(..)).sum()
    }

    /// All arcs in ascending `(u, v)` order.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs = Vec::with_capacity(self.arc_count());
        for u in 0..self.n() {
            arcs.extend(self.out[u].ones().map(|v| (u, v)));
        }
        arcs
    }

    /// Even number of classes and every arc joins side A to side B.
    pub fn is_bipartite(&self) -> bool {
        self.n_classes % 2 == 0 && self.arcs().iter().all(|&(u, v)| self.side(u) != self.side(v))
    }

    /// Bipartite, and every A–B pair carries exactly one arc.
    pub fn is_tournament(&self) -> bool {
        if !self.is_bipartite() {
            return false;
        }
        for u in 0..self.n() {
            for v in 0..self.n() {
                if self.side(u) == Side::A && self.side(v) == Side::B && self.has_arc(u, v) == self.has_arc(v, u) {
                    return false;
                }
            }
        }
        true
    }
}

/// The `n`-fold blow-up of the directed `C_K`, classes in contiguous blocks.
pub fn make_blowup_cycle(k: usize, n: usize) -> Result<Digraph> {
    if k < 3 || n < 1 {
        return Err(Error::invalid(format!("blow-up needs K >= 3 and n >= 1, got K={k}, n={n}")));
    }
    let class: Vec<usize> = (0..k * n).map(|v| v / n).collect();
    let mut d = Digraph::new(class, k)?;
    for i in 0..k {
        let j = (i + 1) % k;
        for a in 0..n {
            for b in 0..n {
                d.add_arc(i * n + a, j * n + b)?;
            }
        }
    }
    Ok(d)
}

pub fn flip_edges(d: &Digraph, arcs: &[Arc]) -> Result<Digraph> {
    let mut f = d.clone();
    for &(u, v) in arcs {
        if !f.remove_arc(u, v) {
            return Err(Error::invalid(format!("({u},{v}) is not an arc")));
        }
    }
    for &(u, v) in arcs {
        if f.has_arc(v, u) {
            return Err(Error::invalid(format!("reversing ({u},{v}) makes a parallel pair")));
        }
        f.add_arc(v, u)?;
    }
    Ok(f)
}

/// Blow-up `C_4` with the transversal 4-cycle through the first vertex of each
/// class reversed. Every pair then carries exactly one backward edge.
pub fn one_flipped_c4(n: usize) -> Result<Digraph> {
    let d = make_blowup_cycle(4, n)?;
    flip_edges(&d, &[(0, n), (n, 2 * n), (2 * n, 3 * n), (3 * n, 0)])
}

/// Blow-up `C_3` with one transversal triangle reversed; never Hamilton decomposable.
pub fn tripartite_counterexample(n: usize) -> Result<Digraph> {
    if n < 2 {
        return Err(Error::invalid(format!("tripartite counterexample needs n >= 2, got {n}")));
    }
    let d = make_blowup_cycle(3, n)?;
    flip_edges(&d, &[(0, n), (n, 2 * n), (2 * n, 0)])
}

/// Random `n`-regular bipartite tournament: reverse random directed 4-cycles
/// a→b→a′→b′→a (alternating sides) of the blow-up `C_4`.
pub fn random_regular_bitournament(n: usize, flips: usize, seed: u64) -> Result<Digraph> {
    let mut d = make_blowup_cycle(4, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side_a = d.side_members(Side::A);
    let mut done = 0;
    let mut attempts = 0;
    while done < flips && attempts < 100 * flips {
        attempts += 1;
        let a = side_a[rng.gen_range(0..side_a.len())];
        let Some(b) = pick(&mut rng, d.out_nbrs(a)) else { continue };
        let Some(a2) = pick(&mut rng, d.out_nbrs(b)) else { continue };
        if a2 == a {
            continue;
        }
        let mut back = d.out_nbrs(a2).clone();
        back.intersect_with(d.in_nbrs(a));
        back.set(b, false);
        let Some(b2) = pick(&mut rng, &back) else { continue };
        d = flip_edges(&d, &[(a, b), (b, a2), (a2, b2), (b2, a)])?;
        done += 1;
    }
    Ok(d)
}

fn pick(rng: &mut ChaCha8Rng, set: &FixedBitSet) -> Option<Vertex> {
    let items: Vec<Vertex> = set.ones().collect();
    items.choose(rng).copied()
}

pub fn is_regular(d: &Digraph) -> Option<usize> {
    if d.n() == 0 {
        return Some(0);
    }
    let r = d.out_degree(0);
    (0..d.n()).all(|v| d.out_degree(v) == r && d.in_degree(v) == r).then_some(r)
}
