//! Feasible and pseudo-feasible systems, and the pipeline that decomposes the
//! backward and exceptional edges of a regular bipartite tournament into them.
//!
//! A system is a sorted arc list. Isolated vertices are never stored; every
//! predicate here is blind to them, so nothing is lost.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::digraph::{Arc, Digraph, Vertex};
use crate::error::{Error, Result};
use crate::forest::linear_forest_violation;
use crate::partition::{gamma_sets, ExceptionalSet, QuadPartition, ThresholdSets};

mod backward;
mod extend;
mod movedeg;
mod pipeline;

pub use backward::{cover_forward_exceptional, decompose_backward_all, select_backward_matchings, BackwardDemand};
pub use extend::{extend_linear_forests, ExtendRequest};
pub use movedeg::{check_move_degree2, move_degree2, Node, NodeEdge};
pub use pipeline::{
    decompose_backward_and_exceptional, extend_endpoints, extend_startpoints, incorporate_prescribed,
    pseudo_to_feasible, redistribute_placeholders, cover_exceptional,
};

/// The frame `(U, U*, γ)` every predicate is relative to.
#[derive(Clone, Debug)]
pub struct FeasibilityContext {
    pub tournament: Digraph,
    pub partition: QuadPartition,
    pub exceptional: ExceptionalSet,
    pub gamma: f64,
    high: ThresholdSets,
    masks: [FixedBitSet; 4],
}

impl FeasibilityContext {
    pub fn new(tournament: Digraph, partition: QuadPartition, exceptional: ExceptionalSet, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(Error::invalid(format!("gamma = {gamma} must lie in (0, 1/2]")));
        }
        if partition.n() * 4 != tournament.n() {
            return Err(Error::invalid("partition does not match the tournament"));
        }
        for (i, s) in exceptional.slices.iter().enumerate() {
            if s.len() != exceptional.slices[0].len() {
                return Err(Error::invalid("U* slices must have equal sizes"));
            }
            if let Some(&v) = s.iter().find(|&&v| partition.index_of(v) != i) {
                return Err(Error::invalid(format!("U* member {v} is filed under the wrong class")));
            }
        }
        let high = gamma_sets(&tournament, &partition, 1.0 - gamma);
        let masks = [0, 1, 2, 3].map(|i| partition.mask(i));
        Ok(FeasibilityContext { tournament, partition, exceptional, gamma, high, masks })
    }

    /// The same frame with the classes relabelled `U_i ↦ U_{i-k}`.
    pub fn rotated(&self, k: usize) -> Result<Self> {
        let p = self.partition.rotate(k);
        let members: Vec<Vertex> = self.exceptional.members().ones().collect();
        let ex = ExceptionalSet::from_members(&p, self.tournament.n(), &members)?;
        FeasibilityContext::new(self.tournament.clone(), p, ex, self.gamma)
    }

    /// A copy with a different threshold; lemmas applied "with 2γ in place of
    /// γ" need values above 1/2, so only `(0, 1]` is enforced.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::invalid(format!("threshold {gamma} must lie in (0, 1]")));
        }
        let high = gamma_sets(&self.tournament, &self.partition, 1.0 - gamma);
        Ok(FeasibilityContext { gamma, high, ..self.clone() })
    }

    /// Class size n.
    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn n_vertices(&self) -> usize {
        self.tournament.n()
    }

    pub fn index(&self, v: Vertex) -> usize {
        self.partition.index_of(v)
    }

    pub fn class(&self, i: usize) -> &[Vertex] {
        self.partition.class(i % 4)
    }

    pub fn in_ustar(&self, v: Vertex) -> bool {
        self.exceptional.contains(v)
    }

    /// Membership in `U^{1−γ}`.
    pub fn is_high(&self, v: Vertex) -> bool {
        self.high.contains(v)
    }

    pub fn high(&self) -> &ThresholdSets {
        &self.high
    }

    /// `|N⁺_T(v) ∩ U_i|`.
    pub fn out_into(&self, v: Vertex, i: usize) -> usize {
        self.tournament.out_nbrs(v).intersection(&self.masks[i % 4]).count()
    }

    /// `|N⁻_T(v) ∩ U_i|`.
    pub fn in_from(&self, v: Vertex, i: usize) -> usize {
        self.tournament.in_nbrs(v).intersection(&self.masks[i % 4]).count()
    }

    pub fn is_forward(&self, (u, v): Arc) -> bool {
        self.partition.is_forward(u, v)
    }

    pub fn is_backward(&self, (u, v): Arc) -> bool {
        self.partition.is_backward(u, v)
    }
}

/// Whether `e` is a (γ, T)-placeholder: it joins U* to its complement and the
/// U* end has more than γn neighbours in the class of the other end, on the
/// side the edge leaves or enters.
pub fn is_placeholder(e: Arc, ctx: &FeasibilityContext) -> bool {
    let (u, v) = e;
    if !ctx.tournament.has_arc(u, v) {
        return false;
    }
    let gn = ctx.gamma * ctx.n() as f64;
    match (ctx.in_ustar(u), ctx.in_ustar(v)) {
        (true, false) => ctx.out_into(u, ctx.index(v)) as f64 > gn,
        (false, true) => ctx.in_from(v, ctx.index(u)) as f64 > gn,
        _ => false,
    }
}

/// A forward placeholder never touches `U^{1−γ}`; checked rather than assumed.
pub fn check_placeholder_forward(e: Arc, ctx: &FeasibilityContext) -> Result<()> {
    if is_placeholder(e, ctx) && ctx.is_forward(e) && (ctx.is_high(e.0) || ctx.is_high(e.1)) {
        return Err(Error::invariant(
            "forward placeholder",
            format!("({},{}) is a forward placeholder meeting U^(1-gamma)", e.0, e.1),
        ));
    }
    Ok(())
}

fn degrees(arcs: &[Arc], nv: usize) -> (Vec<usize>, Vec<usize>) {
    let mut out = vec![0; nv];
    let mut inn = vec![0; nv];
    for &(u, v) in arcs {
        out[u] += 1;
        inn[v] += 1;
    }
    (out, inn)
}

/// `back[i] = e_F(U_i, U_{i-1})` with 0-based classes.
pub fn backward_pair_counts(arcs: &[Arc], u: &QuadPartition) -> [usize; 4] {
    let mut back = [0; 4];
    for &(a, b) in arcs {
        if u.is_backward(a, b) {
            back[u.index_of(a)] += 1;
        }
    }
    back
}

fn common_violation(arcs: &[Arc], ctx: &FeasibilityContext) -> Option<String> {
    let nv = ctx.n_vertices();
    let mut seen = BTreeSet::new();
    for &(u, v) in arcs {
        if u >= nv || v >= nv || !ctx.tournament.has_arc(u, v) {
            return Some(format!("({u},{v}) is not an arc of T"));
        }
        if !seen.insert((u, v)) {
            return Some(format!("({u},{v}) listed twice"));
        }
    }
    let b = backward_pair_counts(arcs, &ctx.partition);
    if b[0] != b[2] {
        return Some(format!("F1: e(U1,U4) = {} but e(U3,U2) = {}", b[0], b[2]));
    }
    if b[3] != b[1] {
        return Some(format!("F1: e(U4,U3) = {} but e(U2,U1) = {}", b[3], b[1]));
    }
    None
}

/// First failed condition of feasibility, if any.
pub fn feasibility_violation(arcs: &[Arc], ctx: &FeasibilityContext) -> Option<String> {
    if let Some(why) = common_violation(arcs, ctx) {
        return Some(why);
    }
    let (out, inn) = degrees(arcs, ctx.n_vertices());
    if let Some(v) = ctx.exceptional.members().ones().find(|&v| out[v] != 1 || inn[v] != 1) {
        return Some(format!("F2: U* vertex {v} has out/in degree {}/{}", out[v], inn[v]));
    }
    linear_forest_violation(arcs).map(|w| format!("F3: {w}"))
}

pub fn is_feasible(arcs: &[Arc], ctx: &FeasibilityContext) -> bool {
    feasibility_violation(arcs, ctx).is_none()
}

/// First failed condition of pseudo-feasibility, if any.
pub fn pseudo_violation(arcs: &[Arc], ctx: &FeasibilityContext) -> Option<String> {
    if let Some(why) = common_violation(arcs, ctx) {
        return Some(why);
    }
    let nv = ctx.n_vertices();
    let (out, inn) = degrees(arcs, nv);
    for v in ctx.exceptional.members().ones() {
        if out[v] > 1 || inn[v] > 1 {
            return Some(format!("F2': U* vertex {v} has out/in degree {}/{}", out[v], inn[v]));
        }
        if ctx.is_high(v) && (out[v] != 1 || inn[v] != 1) {
            return Some(format!("F2': U^(1-gamma) vertex {v} has out/in degree {}/{}", out[v], inn[v]));
        }
    }
    let solid: Vec<Arc> = arcs.iter().copied().filter(|&e| !is_placeholder(e, ctx)).collect();
    let (sout, sin) = degrees(&solid, nv);
    if let Some(v) = (0..nv).find(|&v| !ctx.in_ustar(v) && (sout[v] > 1 || sin[v] > 1)) {
        return Some(format!("F3': vertex {v} has {} non-placeholder out-arcs and {} in-arcs", sout[v], sin[v]));
    }
    if let Some(v) = cycle_vertex(&solid, nv) {
        return Some(format!("F4': the non-placeholder arcs contain a cycle reaching {v}"));
    }
    None
}

pub fn is_pseudo_feasible(arcs: &[Arc], ctx: &FeasibilityContext) -> bool {
    pseudo_violation(arcs, ctx).is_none()
}

/// Some vertex on or after a directed cycle, via Kahn's algorithm.
fn cycle_vertex(arcs: &[Arc], nv: usize) -> Option<Vertex> {
    let mut adj = vec![Vec::new(); nv];
    let mut indeg = vec![0usize; nv];
    for &(u, v) in arcs {
        adj[u].push(v);
        indeg[v] += 1;
    }
    let mut stack: Vec<Vertex> = (0..nv).filter(|&v| indeg[v] == 0).collect();
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    (0..nv).find(|&v| indeg[v] > 0)
}

/// The constant ℓ with `|V(C) ∩ U_i| = ℓ + e_C(U_{i+1}, U_i) + e_C(U_i, U_{i-1})`
/// for every class, where `cycle` lists the vertices of C in order.
pub fn cycle_ell(cycle: &[Vertex], u: &QuadPartition) -> Result<i64> {
    let k = cycle.len();
    if k < 2 {
        return Err(Error::invalid("a cycle needs at least two vertices"));
    }
    let distinct: BTreeSet<Vertex> = cycle.iter().copied().collect();
    if distinct.len() != k {
        return Err(Error::invalid("cycle repeats a vertex"));
    }
    let mut count = [0i64; 4];
    let mut back = [0i64; 4];
    for (j, &a) in cycle.iter().enumerate() {
        let b = cycle[(j + 1) % k];
        let (ia, ib) = (u.index_of(a), u.index_of(b));
        count[ia] += 1;
        if (ia + 2) % 4 == ib || ia == ib {
            return Err(Error::invalid(format!("({a},{b}) does not cross the bipartition")));
        }
        if u.is_backward(a, b) {
            back[ia] += 1;
        }
    }
    let ell: Vec<i64> = (0..4).map(|i| count[i] - back[(i + 1) % 4] - back[i]).collect();
    if ell.iter().any(|&l| l != ell[0]) {
        return Err(Error::invariant("cycle identity", format!("class constants differ: {ell:?}")));
    }
    Ok(ell[0])
}

/// Recounts `n_i^+ = n_{i+1}^-` over the non-trivial components of a feasible
/// system whose internal vertices are exactly U*.
pub fn balanced_special_cover_check(arcs: &[Arc], ctx: &FeasibilityContext) -> Result<bool> {
    if let Some(why) = feasibility_violation(arcs, ctx) {
        return Err(Error::invalid(format!("system is not feasible: {why}")));
    }
    let (out, inn) = degrees(arcs, ctx.n_vertices());
    let internal: BTreeSet<Vertex> = (0..ctx.n_vertices()).filter(|&v| out[v] == 1 && inn[v] == 1).collect();
    let ustar: BTreeSet<Vertex> = ctx.exceptional.members().ones().collect();
    if internal != ustar {
        return Err(Error::invalid("internal vertices of the system differ from U*"));
    }
    let mut starts = [0usize; 4];
    let mut ends = [0usize; 4];
    for v in 0..ctx.n_vertices() {
        if out[v] > 0 && inn[v] == 0 {
            starts[ctx.index(v)] += 1;
        }
        if inn[v] > 0 && out[v] == 0 {
            ends[ctx.index(v)] += 1;
        }
    }
    for i in 0..4 {
        if starts[i] != ends[(i + 1) % 4] {
            return Err(Error::invariant(
                "balanced cover",
                format!("{} paths start in U{} but {} end in U{}", starts[i], i + 1, ends[(i + 1) % 4], (i + 1) % 4 + 1),
            ));
        }
    }
    Ok(true)
}

/// Starting points of the paths of an arc set.
pub fn starts_of(arcs: &[Arc]) -> BTreeSet<Vertex> {
    let heads: BTreeSet<Vertex> = arcs.iter().map(|a| a.1).collect();
    arcs.iter().map(|a| a.0).filter(|v| !heads.contains(v)).collect()
}

/// Ending points of the paths of an arc set.
pub fn ends_of(arcs: &[Arc]) -> BTreeSet<Vertex> {
    let tails: BTreeSet<Vertex> = arcs.iter().map(|a| a.0).collect();
    arcs.iter().map(|a| a.1).filter(|v| !tails.contains(v)).collect()
}

/// `V(E(F))`.
pub fn touched(arcs: &[Arc]) -> BTreeSet<Vertex> {
    arcs.iter().flat_map(|&(u, v)| [u, v]).collect()
}

/// Checks that systems are pairwise edge-disjoint.
pub fn check_disjoint(systems: &[Vec<Arc>], name: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, s) in systems.iter().enumerate() {
        for &a in s {
            if !seen.insert(a) {
                return Err(Error::invariant(name, format!("arc ({},{}) reused by system {i}", a.0, a.1)));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
