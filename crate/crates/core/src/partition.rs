//! Quad partitions `(U1, U2, U3, U4)` of a regular bipartite tournament.
//!
//! Class indices are 0-based here: `class(0)` is U1. A forward edge goes
//! `U_i → U_{i+1}`, a backward edge `U_{i+1} → U_i`, indices mod 4.

use fixedbitset::FixedBitSet;
use itertools::Itertools;

use crate::digraph::{is_regular, Arc, Digraph, Side, Vertex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadPartition {
    classes: [Vec<Vertex>; 4],
    index: Vec<usize>,
}

impl QuadPartition {
    /// `classes[i]` becomes `U_{i+1}`. Sizes must agree, the classes must
    /// cover `V(d)`, and U1 ∪ U3, U2 ∪ U4 must be the two sides of `d`.
    pub fn new(d: &Digraph, mut classes: [Vec<Vertex>; 4]) -> Result<Self> {
        let n = classes[0].len();
        if classes.iter().any(|c| c.len() != n) || 4 * n != d.n() {
            return Err(Error::invalid("quad partition classes must have equal size and cover V"));
        }
        let mut index = vec![usize::MAX; d.n()];
        for (i, c) in classes.iter_mut().enumerate() {
            c.sort_unstable();
            for &v in c.iter() {
                if v >= d.n() || index[v] != usize::MAX {
                    return Err(Error::invalid(format!("vertex {v} repeated or out of range")));
                }
                index[v] = i;
            }
        }
        if n > 0 {
            let s0 = d.side(classes[0][0]);
            for (i, c) in classes.iter().enumerate() {
                let want = if i % 2 == 0 { s0 } else { other(s0) };
                if c.iter().any(|&v| d.side(v) != want) {
                    return Err(Error::invalid("U1 ∪ U3 and U2 ∪ U4 must be the bipartition classes"));
                }
            }
        }
        Ok(QuadPartition { classes, index })
    }

    /// The partition given by class labels 0..3 of a 4-class digraph.
    pub fn native(d: &Digraph) -> Result<Self> {
        if d.n_classes() != 4 {
            return Err(Error::invalid("native quad partition needs exactly 4 classes"));
        }
        QuadPartition::new(d, [d.class_members(0), d.class_members(1), d.class_members(2), d.class_members(3)])
    }

    pub fn n(&self) -> usize {
        self.classes[0].len()
    }

    pub fn class(&self, i: usize) -> &[Vertex] {
        &self.classes[i % 4]
    }

    pub fn index_of(&self, v: Vertex) -> usize {
        self.index[v]
    }

    pub fn mask(&self, i: usize) -> FixedBitSet {
        let mut m = FixedBitSet::with_capacity(self.index.len());
        for &v in self.class(i) {
            m.insert(v);
        }
        m
    }

    pub fn is_forward(&self, u: Vertex, v: Vertex) -> bool {
        (self.index[u] + 1) % 4 == self.index[v]
    }

    pub fn is_backward(&self, u: Vertex, v: Vertex) -> bool {
        (self.index[v] + 1) % 4 == self.index[u]
    }

    /// `(U_{1+k}, U_{2+k}, U_{3+k}, U_{4+k})`.
    pub fn rotate(&self, k: usize) -> QuadPartition {
        let classes = [0, 1, 2, 3].map(|i| self.class(i + k).to_vec());
        let index = self.index.iter().map(|&i| (i + 4 - k % 4) % 4).collect();
        QuadPartition { classes, index }
    }

    pub fn classes(&self) -> &[Vec<Vertex>; 4] {
        &self.classes
    }
}

fn other(s: Side) -> Side {
    match s {
        Side::A => Side::B,
        Side::B => Side::A,
    }
}

pub fn backward_edges(d: &Digraph, u: &QuadPartition) -> Vec<Arc> {
    d.arcs().into_iter().filter(|&(a, b)| u.is_backward(a, b)).collect()
}

pub fn forward_edges(d: &Digraph, u: &QuadPartition) -> Vec<Arc> {
    d.arcs().into_iter().filter(|&(a, b)| u.is_forward(a, b)).collect()
}

/// Backward out-degree of `v`, i.e. arcs into the preceding class.
pub fn backward_degree(d: &Digraph, u: &QuadPartition, v: Vertex) -> usize {
    let prev = u.mask(u.index_of(v) + 3);
    d.out_nbrs(v).intersection(&prev).count()
}

/// `back[i] = e(U_i, U_{i-1})` and `fwd[i] = e(U_i, U_{i+1})`.
pub fn pair_counts(d: &Digraph, u: &QuadPartition) -> ([usize; 4], [usize; 4]) {
    let mut back = [0; 4];
    let mut fwd = [0; 4];
    for (a, b) in d.arcs() {
        if u.is_backward(a, b) {
            back[u.index_of(a)] += 1;
        } else if u.is_forward(a, b) {
            fwd[u.index_of(a)] += 1;
        }
    }
    (back, fwd)
}

pub fn backward_total(d: &Digraph, u: &QuadPartition) -> usize {
    pair_counts(d, u).0.iter().sum()
}

/// Checks the degree symmetries of a regular bipartite tournament under `u`
/// and returns the common backward pair count.
pub fn check_regular_balance(d: &Digraph, u: &QuadPartition) -> Result<usize> {
    for v in 0..d.n() {
        let i = u.index_of(v);
        let (next, prev) = (u.mask(i + 1), u.mask(i + 3));
        let fo = d.out_nbrs(v).intersection(&next).count();
        let fi = d.in_nbrs(v).intersection(&prev).count();
        let bo = d.out_nbrs(v).intersection(&prev).count();
        let bi = d.in_nbrs(v).intersection(&next).count();
        if fo != fi || bo != bi {
            return Err(Error::invalid(format!(
                "vertex {v}: forward out/in {fo}/{fi}, backward out/in {bo}/{bi}"
            )));
        }
    }
    let (back, fwd) = pair_counts(d, u);
    for i in 1..4 {
        if back[i] != back[0] {
            return Err(Error::invalid(format!("backward pair counts differ: {back:?} (pair {})", i + 1)));
        }
        if fwd[i] != fwd[0] {
            return Err(Error::invalid(format!("forward pair counts differ: {fwd:?} (pair {})", i + 1)));
        }
    }
    Ok(back[0])
}

pub fn eps4_check(d: &Digraph, u: &QuadPartition, eps: f64) -> bool {
    let n = u.n() as f64;
    pair_counts(d, u).0.iter().all(|&b| b as f64 <= eps * n * n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionMode {
    Exact,
    Local,
}

/// Largest class size `2n` for which exact mode is accepted.
pub const EXACT_CLASS_CAP: usize = 12;

/// A quad partition with the fewest backward edges (exact) or one that no
/// single swap improves (local).
pub fn optimal_partition(d: &Digraph, mode: PartitionMode) -> Result<QuadPartition> {
    if !d.is_tournament() {
        return Err(Error::invalid("optimal_partition needs a bipartite tournament"));
    }
    let side_a = d.side_members(Side::A);
    let side_b = d.side_members(Side::B);
    let n = side_a.len() / 2;
    if side_a.len() != side_b.len() || side_a.len() % 2 != 0 || is_regular(d) != Some(n) {
        return Err(Error::invalid("optimal_partition needs an n-regular tournament with classes of size 2n"));
    }
    let part = match mode {
        PartitionMode::Exact => {
            if 2 * n > EXACT_CLASS_CAP {
                return Err(Error::size("class size for exact partition", 2 * n, EXACT_CLASS_CAP));
            }
            exact_partition(d, &side_a, &side_b)?
        }
        PartitionMode::Local => local_partition(d, &side_a, &side_b)?,
    };
    let heavy = gamma_sets(d, &part, 0.5);
    for j in 0..2 {
        if !heavy.sets[j].is_empty() && !heavy.sets[j + 2].is_empty() {
            let (x, y) = (heavy.sets[j + 2][0], heavy.sets[j][0]);
            return Err(Error::invariant(
                "gamma-optimal",
                format!("swapping {x} and {y} would remove backward edges"),
            ));
        }
    }
    Ok(part)
}

// Every split of side A into (U1, U3); for each, the best (U2, U4) is found by
// sorting, since the backward count is a sum of per-vertex terms over side B
// once U1 and U3 are fixed.
fn exact_partition(d: &Digraph, side_a: &[Vertex], side_b: &[Vertex]) -> Result<QuadPartition> {
    let n = side_a.len() / 2;
    let mut best: Option<(usize, QuadPartition)> = None;
    for u1 in side_a.iter().copied().combinations(n) {
        let u3: Vec<Vertex> = side_a.iter().copied().filter(|v| !u1.contains(v)).collect();
        let m1 = mask_of(d.n(), &u1);
        let m3 = mask_of(d.n(), &u3);
        // cost of b in U2: arcs b→U1 and U3→b; in U4: arcs b→U3 and U1→b.
        let mut keyed: Vec<(i64, Vertex)> = side_b
            .iter()
            .map(|&b| {
                let c2 = d.out_nbrs(b).intersection(&m1).count() + d.in_nbrs(b).intersection(&m3).count();
                let c4 = d.out_nbrs(b).intersection(&m3).count() + d.in_nbrs(b).intersection(&m1).count();
                (c2 as i64 - c4 as i64, b)
            })
            .collect();
        keyed.sort_unstable();
        let u2: Vec<Vertex> = keyed[..n].iter().map(|&(_, b)| b).collect();
        let u4: Vec<Vertex> = keyed[n..].iter().map(|&(_, b)| b).collect();
        let part = QuadPartition::new(d, [u1, u2, u3, u4])?;
        let cost = backward_total(d, &part);
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, part));
        }
    }
    Ok(best.expect("at least one split").1)
}

fn local_partition(d: &Digraph, side_a: &[Vertex], side_b: &[Vertex]) -> Result<QuadPartition> {
    let m = side_a.len();
    let n = m / 2;
    let mut best: Option<(usize, QuadPartition)> = None;
    for k in 0..4 {
        let shift = (m * k).div_ceil(4) % m.max(1);
        let mut a = side_a.to_vec();
        let mut b = side_b.to_vec();
        a.rotate_left(shift);
        b.rotate_left(shift);
        let mut part = QuadPartition::new(d, [a[..n].to_vec(), b[..n].to_vec(), a[n..].to_vec(), b[n..].to_vec()])?;
        let mut cost = backward_total(d, &part);
        'climb: loop {
            for x in 0..d.n() {
                for y in x + 1..d.n() {
                    let (ix, iy) = (part.index_of(x), part.index_of(y));
                    if (ix + 2) % 4 != iy {
                        continue;
                    }
                    let cand = swap(d, &part, x, y)?;
                    let c = backward_total(d, &cand);
                    if c < cost {
                        part = cand;
                        cost = c;
                        continue 'climb;
                    }
                }
            }
            break;
        }
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, part));
        }
    }
    Ok(best.expect("four restarts").1)
}

fn swap(d: &Digraph, part: &QuadPartition, x: Vertex, y: Vertex) -> Result<QuadPartition> {
    let (ix, iy) = (part.index_of(x), part.index_of(y));
    let mut classes = part.classes().clone();
    for v in classes[ix].iter_mut() {
        if *v == x {
            *v = y;
        }
    }
    for v in classes[iy].iter_mut() {
        if *v == y {
            *v = x;
        }
    }
    QuadPartition::new(d, classes)
}

fn mask_of(len: usize, vs: &[Vertex]) -> FixedBitSet {
    let mut m = FixedBitSet::with_capacity(len);
    for &v in vs {
        m.insert(v);
    }
    m
}

/// `sets[i] = U_{i+1}^γ`: vertices of `U_{i+1}` with backward degree `> γn`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSets {
    pub gamma: f64,
    pub sets: [Vec<Vertex>; 4],
    members: FixedBitSet,
}

impl ThresholdSets {
    pub fn contains(&self, v: Vertex) -> bool {
        self.members.contains(v)
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().all(|s| s.is_empty())
    }
}

pub fn gamma_sets(d: &Digraph, u: &QuadPartition, gamma: f64) -> ThresholdSets {
    let n = u.n() as f64;
    let mut members = FixedBitSet::with_capacity(d.n());
    let sets = [0, 1, 2, 3].map(|i| {
        let s: Vec<Vertex> =
            u.class(i).iter().copied().filter(|&v| backward_degree(d, u, v) as f64 > gamma * n).collect();
        for &v in &s {
            members.insert(v);
        }
        s
    });
    ThresholdSets { gamma, sets, members }
}

/// An exceptional set U* with equal slices `slices[i] ⊆ U_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionalSet {
    pub slices: [Vec<Vertex>; 4],
    members: FixedBitSet,
}

impl ExceptionalSet {
    pub fn empty(n_vertices: usize) -> Self {
        ExceptionalSet { slices: Default::default(), members: FixedBitSet::with_capacity(n_vertices) }
    }

    /// Wraps a given set; slices must be equal in size.
    pub fn from_members(u: &QuadPartition, n_vertices: usize, members: &[Vertex]) -> Result<Self> {
        let mut slices: [Vec<Vertex>; 4] = Default::default();
        let mut m = FixedBitSet::with_capacity(n_vertices);
        for &v in members {
            if v >= n_vertices || m.put(v) {
                return Err(Error::invalid(format!("U* member {v} repeated or out of range")));
            }
            slices[u.index_of(v)].push(v);
        }
        if slices.iter().any(|s| s.len() != slices[0].len()) {
            return Err(Error::invalid("U* slices must have equal sizes"));
        }
        for s in slices.iter_mut() {
            s.sort_unstable();
        }
        Ok(ExceptionalSet { slices, members: m })
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.members.contains(v)
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.slices.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// U* = U^{ε′} padded per class to a common size, preferring high backward
/// degree and then small ids.
pub fn exceptional_set(d: &Digraph, u: &QuadPartition, eps_prime: f64) -> Result<ExceptionalSet> {
    let base = gamma_sets(d, u, eps_prime);
    let m = base.sets.iter().map(Vec::len).max().unwrap_or(0);
    let cap = eps_prime * u.n() as f64;
    if m as f64 > cap {
        let i = (0..4).find(|&i| base.sets[i].len() == m).unwrap_or(0);
        return Err(Error::Infeasible(format!(
            "U{}^eps' has {m} vertices but an exceptional set allows at most {cap:.3} per class",
            i + 1
        )));
    }
    let mut all = Vec::new();
    for i in 0..4 {
        let mut rest: Vec<(usize, Vertex)> = u
            .class(i)
            .iter()
            .filter(|&&v| !base.contains(v))
            .map(|&v| (backward_degree(d, u, v), v))
            .collect();
        rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        all.extend(base.sets[i].iter().copied());
        all.extend(rest.iter().take(m - base.sets[i].len()).map(|&(_, v)| v));
    }
    ExceptionalSet::from_members(u, d.n(), &all)
}

/// Output of [`build_optimal_h`]; `partition` is the rotation the
/// construction ran in, with U3 and U4 free of `U^{1−γ}`.
#[derive(Clone, Debug)]
pub struct OptimalH {
    pub arcs: Vec<Arc>,
    pub rotation: usize,
    pub partition: QuadPartition,
}

/// A sparse backward subdigraph that avoids `U^{1−γ}` yet has many edges in
/// every backward pair.
pub fn build_optimal_h(d: &Digraph, u: &QuadPartition, gamma: f64) -> Result<OptimalH> {
    let low = gamma_sets(d, u, gamma);
    let high = gamma_sets(d, u, 1.0 - gamma);
    let ok = |k: usize| {
        (0..2).all(|i| {
            let (a, b) = ((i + k) % 4, (i + 2 + k) % 4);
            (high.sets[a].is_empty() && high.sets[b].is_empty()) || low.sets[b].is_empty()
        })
    };
    let rotation = (0..4)
        .find(|&k| ok(k))
        .ok_or_else(|| Error::invalid("no rotation satisfies the optimality conditions; partition not optimal"))?;
    let r = u.rotate(rotation);
    let heavy = gamma_sets(d, &r, 1.0 - gamma);
    let hm = heavy.members();
    let hmask = |i: usize| mask_of(d.n(), &heavy.sets[i % 4]);

    // E_v: out-arcs into U_{i-1} for v in U1, U4; in-arcs from U_{i+1} for v in U2, U3.
    let e_v = |v: Vertex| -> Vec<Arc> {
        let i = r.index_of(v);
        match i {
            0 | 3 => {
                let k = d.in_nbrs(v).intersection(&hmask(i + 1)).count();
                let prev = r.mask(i + 3);
                d.out_nbrs(v).intersection(&prev).take(k).map(|w| (v, w)).collect()
            }
            _ => {
                let k = d.out_nbrs(v).intersection(&hmask(i + 3)).count();
                let next = r.mask(i + 1);
                d.in_nbrs(v).intersection(&next).take(k).map(|w| (w, v)).collect()
            }
        }
    };
    let union_over = |i: usize| -> Vec<Arc> {
        r.class(i).iter().filter(|&&v| !hm.contains(v)).flat_map(|&v| e_v(v)).collect()
    };
    let mut arcs = union_over(0);
    arcs.extend(union_over(1));
    let (h1, h2) = (heavy.sets[0].is_empty(), heavy.sets[1].is_empty());
    match (h1, h2) {
        (true, true) => {}
        (false, false) => {
            let m3 = r.mask(2);
            for &w in r.class(3) {
                arcs.extend(d.out_nbrs(w).intersection(&m3).map(|x| (w, x)));
            }
        }
        (false, true) => arcs.extend(union_over(3)),
        (true, false) => arcs.extend(union_over(2)),
    }
    arcs.sort_unstable();
    arcs.dedup();
    check_optimal_h(d, &r, gamma, &arcs)?;
    Ok(OptimalH { arcs, rotation, partition: r })
}

/// Recounts the three properties of the balancing subgraph.
pub fn check_optimal_h(d: &Digraph, u: &QuadPartition, gamma: f64, arcs: &[Arc]) -> Result<()> {
    let n = u.n() as f64;
    let heavy = gamma_sets(d, u, 1.0 - gamma);
    let mut dout = vec![0usize; d.n()];
    let mut din = vec![0usize; d.n()];
    let mut pair = [0usize; 4];
    for &(a, b) in arcs {
        if !d.has_arc(a, b) || !u.is_backward(a, b) {
            return Err(Error::invariant("optimalH", format!("({a},{b}) is not a backward arc")));
        }
        if heavy.contains(a) || heavy.contains(b) {
            return Err(Error::invariant("optimalH(ii)", format!("({a},{b}) touches U^(1-gamma)")));
        }
        dout[a] += 1;
        din[b] += 1;
        pair[u.index_of(a)] += 1;
    }
    if let Some(v) = (0..d.n()).find(|&v| dout[v].max(din[v]) as f64 > gamma * n) {
        return Err(Error::hypothesis(
            "optimalH(i)",
            format!("vertex {v} has H-degree {} > gamma*n = {:.3}", dout[v].max(din[v]), gamma * n),
        ));
    }
    for i in 0..4 {
        let need = (1.0 - 2.0 * gamma) * n * (heavy.sets[(i + 2) % 4].len() + heavy.sets[(i + 1) % 4].len()) as f64;
        if (pair[i] as f64) < need {
            return Err(Error::hypothesis(
                "optimalH(iii)",
                format!("e_H(U{},U{}) = {} < {need:.3}", i + 1, (i + 3) % 4 + 1, pair[i]),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{flip_edges, make_blowup_cycle, one_flipped_c4, random_regular_bitournament};

    // Backward count over every pair of balanced splits, no shortcuts.
    fn brute_min_backward(d: &Digraph) -> usize {
        let a = d.side_members(Side::A);
        let b = d.side_members(Side::B);
        let n = a.len() / 2;
        let mut best = usize::MAX;
        for u1 in a.iter().copied().combinations(n) {
            for u2 in b.iter().copied().combinations(n) {
                let u3: Vec<_> = a.iter().copied().filter(|v| !u1.contains(v)).collect();
                let u4: Vec<_> = b.iter().copied().filter(|v| !u2.contains(v)).collect();
                let cls = [u1.clone(), u2, u3, u4];
                let idx = |v: Vertex| cls.iter().position(|c| c.contains(&v)).unwrap();
                let c = d.arcs().iter().filter(|&&(x, y)| (idx(y) + 1) % 4 == idx(x)).count();
                best = best.min(c);
            }
        }
        best
    }

    #[test]
    fn forward_backward_split() {
        let d = make_blowup_cycle(4, 2).unwrap();
        let u = QuadPartition::native(&d).unwrap();
        assert!(backward_edges(&d, &u).is_empty());
        let f = one_flipped_c4(3).unwrap();
        let u = QuadPartition::native(&f).unwrap();
        let back = backward_edges(&f, &u);
        assert_eq!(back.len(), 4);
        assert_eq!(pair_counts(&f, &u).0, [1, 1, 1, 1]);
        assert_eq!(back.len() + forward_edges(&f, &u).len(), f.arc_count());
        assert_eq!(check_regular_balance(&f, &u).unwrap(), 1);
        assert_eq!(check_regular_balance(&d, &QuadPartition::native(&d).unwrap()).unwrap(), 0);
    }

    #[test]
    fn eps4() {
        let d = make_blowup_cycle(4, 2).unwrap();
        assert!(eps4_check(&d, &QuadPartition::native(&d).unwrap(), 0.0));
        let f = one_flipped_c4(2).unwrap();
        assert!(!eps4_check(&f, &QuadPartition::native(&f).unwrap(), 0.1));
        let f = one_flipped_c4(4).unwrap();
        assert!(eps4_check(&f, &QuadPartition::native(&f).unwrap(), 0.1));
    }

    #[test]
    fn rotation_keeps_arcs_classified() {
        let f = one_flipped_c4(2).unwrap();
        let u = QuadPartition::native(&f).unwrap();
        let r = u.rotate(1);
        assert_eq!(r.class(0), u.class(1));
        assert_eq!(backward_edges(&f, &r), backward_edges(&f, &u));
    }

    #[test]
    fn optimal_values() {
        let d = make_blowup_cycle(4, 3).unwrap();
        for mode in [PartitionMode::Exact, PartitionMode::Local] {
            assert_eq!(backward_total(&d, &optimal_partition(&d, mode).unwrap()), 0);
        }
        let f = one_flipped_c4(3).unwrap();
        let p = optimal_partition(&f, PartitionMode::Exact).unwrap();
        // frozen from brute_min_backward
        assert_eq!(backward_total(&f, &p), 4);
        assert_eq!(brute_min_backward(&f), 4);
        let t = crate::digraph::tripartite_counterexample(2).unwrap();
        assert!(optimal_partition(&t, PartitionMode::Exact).is_err());
    }

    #[test]
    fn exact_matches_brute_force() {
        for seed in 0..12 {
            let n = 1 + seed as usize % 4;
            let d = random_regular_bitournament(n, 40, seed).unwrap();
            let e = backward_total(&d, &optimal_partition(&d, PartitionMode::Exact).unwrap());
            let l = backward_total(&d, &optimal_partition(&d, PartitionMode::Local).unwrap());
            assert_eq!(e, brute_min_backward(&d), "seed {seed}");
            assert!(e <= l);
        }
    }

    #[test]
    fn threshold_sets() {
        let d = make_blowup_cycle(4, 2).unwrap();
        let u = QuadPartition::native(&d).unwrap();
        assert!(gamma_sets(&d, &u, 0.5).is_empty());
        // vertex 0 sends all three of its arcs backward
        let d3 = make_blowup_cycle(4, 3).unwrap();
        let flips: Vec<Arc> = (0..3).flat_map(|k| [(0, 3 + k), (3 + k, 6 + k), (6 + k, 9 + k), (9 + k, 0)]).collect();
        let f = flip_edges(&d3, &flips).unwrap();
        let u = QuadPartition::native(&f).unwrap();
        assert_eq!(backward_degree(&f, &u, 0), 3);
        for g in [0.01, 0.3, 0.5, 0.9] {
            assert!(gamma_sets(&f, &u, 1.0 - g).contains(0));
        }
        let lo = gamma_sets(&f, &u, 0.2);
        let hi = gamma_sets(&f, &u, 0.7);
        assert!(hi.members().is_subset(lo.members()));
    }

    #[test]
    fn exceptional_padding() {
        let d = make_blowup_cycle(4, 5).unwrap();
        let u = QuadPartition::native(&d).unwrap();
        assert!(exceptional_set(&d, &u, 0.2).unwrap().is_empty());
        let f = flip_edges(&d, &[(0, 5), (5, 10), (10, 15), (15, 0), (0, 6), (6, 11), (11, 16), (16, 0)]).unwrap();
        let u = QuadPartition::native(&f).unwrap();
        let x = exceptional_set(&f, &u, 0.2).unwrap();
        assert_eq!(x.slices, [vec![0], vec![5], vec![10], vec![15]]);
        assert_eq!(x.len(), 4);
        assert!(exceptional_set(&f, &u, 0.1).is_err());
        assert!(ExceptionalSet::from_members(&u, f.n(), &[0, 5]).is_err());
    }

    #[test]
    fn optimal_h_properties() {
        let d = make_blowup_cycle(4, 3).unwrap();
        let u = QuadPartition::native(&d).unwrap();
        assert!(build_optimal_h(&d, &u, 0.25).unwrap().arcs.is_empty());
        let f = one_flipped_c4(4).unwrap();
        let u = optimal_partition(&f, PartitionMode::Exact).unwrap();
        let h = build_optimal_h(&f, &u, 0.25).unwrap();
        check_optimal_h(&f, &h.partition, 0.25, &h.arcs).unwrap();
    }
}
