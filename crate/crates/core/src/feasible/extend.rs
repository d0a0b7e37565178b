//! Extending many linear forests at once by single arcs at prescribed vertices.

use std::collections::{BTreeMap, BTreeSet};

use crate::digraph::{Arc, Vertex};
use crate::error::{Error, Result};
use crate::forest::linear_forest_violation;
use crate::matchwork::{max_matching, BipGraph};

use super::{ends_of, starts_of, touched};

/// Demands on a bipartite host `(A, B)`: index `i` wants one out-arc at each
/// vertex of `s_plus[i]` and one in-arc at each vertex of `s_minus[i]`, with
/// the other end in `B ∖ avoid[i]`. No `B` vertex may be used by more than
/// `cap` indices.
#[derive(Clone, Debug)]
pub struct ExtendRequest {
    pub a: BTreeSet<Vertex>,
    pub b: BTreeSet<Vertex>,
    pub host: Vec<Arc>,
    pub s_plus: Vec<BTreeSet<Vertex>>,
    pub s_minus: Vec<BTreeSet<Vertex>>,
    pub avoid: Vec<BTreeSet<Vertex>>,
    pub cap: f64,
}

impl ExtendRequest {
    /// Builds a request and checks the degree hypothesis for every demand.
    pub fn new(
        a: BTreeSet<Vertex>,
        b: BTreeSet<Vertex>,
        host: Vec<Arc>,
        s_plus: Vec<BTreeSet<Vertex>>,
        s_minus: Vec<BTreeSet<Vertex>>,
        avoid: Vec<BTreeSet<Vertex>>,
        cap: f64,
    ) -> Result<Self> {
        let req = ExtendRequest::unchecked(a, b, host, s_plus, s_minus, avoid, cap)?;
        if let Some(why) = req.degree_shortfall() {
            return Err(Error::invalid(why));
        }
        Ok(req)
    }

    /// Structural checks only; the degree hypothesis is left to the caller.
    pub fn unchecked(
        a: BTreeSet<Vertex>,
        b: BTreeSet<Vertex>,
        mut host: Vec<Arc>,
        s_plus: Vec<BTreeSet<Vertex>>,
        s_minus: Vec<BTreeSet<Vertex>>,
        avoid: Vec<BTreeSet<Vertex>>,
        cap: f64,
    ) -> Result<Self> {
        let l = s_plus.len();
        if s_minus.len() != l || avoid.len() != l {
            return Err(Error::invalid("demand lists differ in length"));
        }
        if !a.is_disjoint(&b) {
            return Err(Error::invalid("A and B overlap"));
        }
        host.sort_unstable();
        host.dedup();
        if let Some(&(u, v)) = host.iter().find(|&&(u, v)| !(a.contains(&u) && b.contains(&v) || b.contains(&u) && a.contains(&v))) {
            return Err(Error::invalid(format!("host arc ({u},{v}) does not join A and B")));
        }
        for i in 0..l {
            if !s_plus[i].is_subset(&a) || !s_minus[i].is_subset(&a) {
                return Err(Error::invalid(format!("demand set of index {i} leaves A")));
            }
            if !avoid[i].is_subset(&b) {
                return Err(Error::invalid(format!("avoid set of index {i} leaves B")));
            }
        }
        if !(cap >= 1.0 && cap <= 2.0 * a.len() as f64) {
            return Err(Error::invalid(format!("cap N = {cap} must lie in [1, 2|A|] with |A| = {}", a.len())));
        }
        Ok(ExtendRequest { a, b, host, s_plus, s_minus, avoid, cap })
    }

    pub fn len(&self) -> usize {
        self.s_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_plus.is_empty()
    }

    fn host_degree(&self, v: Vertex, out: bool) -> usize {
        self.host.iter().filter(|&&(x, y)| if out { x == v } else { y == v }).count()
    }

    /// The degree hypothesis, as the required degree for demand `(i, ⋄, v)`.
    pub fn required_degree(&self, i: usize, out: bool, v: Vertex) -> f64 {
        let sets = if out { &self.s_plus } else { &self.s_minus };
        let multiplicity = sets.iter().filter(|s| s.contains(&v)).count();
        let own = 2 * (self.s_plus[i].len() + self.s_minus[i].len() + self.avoid[i].len());
        let max_n = self.b.iter().map(|w| self.avoid.iter().filter(|t| t.contains(w)).count()).max().unwrap_or(0);
        let c = (multiplicity as f64).max(own as f64).max(2.0 * (max_n as f64 + self.cap));
        if self.cap >= 2.0 * self.a.len() as f64 {
            c
        } else {
            let total: usize = (0..self.len()).map(|j| self.s_plus[j].len() + self.s_minus[j].len()).sum();
            total as f64 / self.cap.floor() + c
        }
    }

    /// First demand whose host degree is below the required degree.
    pub fn degree_shortfall(&self) -> Option<String> {
        for i in 0..self.len() {
            for (out, set) in [(true, &self.s_plus[i]), (false, &self.s_minus[i])] {
                for &v in set {
                    let need = self.required_degree(i, out, v);
                    let have = self.host_degree(v, out);
                    if (have as f64) < need {
                        let dir = if out { "out" } else { "in" };
                        return Some(format!(
                            "{dir}-degree of {v} in the host is {have}, below the {need:.3} required for index {i}"
                        ));
                    }
                }
            }
        }
        None
    }
}

/// Checks the side conditions on the forests being extended: edge-disjoint
/// from each other and the host, demands only at path ends of the right
/// kind, and every touched `B` vertex avoided.
fn forest_violation(req: &ExtendRequest, forests: &[Vec<Arc>]) -> Option<String> {
    let host: BTreeSet<Arc> = req.host.iter().copied().collect();
    let mut seen = BTreeSet::new();
    for (i, f) in forests.iter().enumerate() {
        if let Some(w) = linear_forest_violation(f) {
            return Some(format!("forest {i}: {w}"));
        }
        for a in f {
            if host.contains(a) || !seen.insert(*a) {
                return Some(format!("forest {i} shares arc ({},{})", a.0, a.1));
            }
        }
        let vs = touched(f);
        let (st, en) = (starts_of(f), ends_of(f));
        if let Some(v) = req.s_plus[i].iter().find(|v| vs.contains(v) && !en.contains(v)) {
            return Some(format!("forest {i}: out-demand at {v}, which is not an end"));
        }
        if let Some(v) = req.s_minus[i].iter().find(|v| vs.contains(v) && !st.contains(v)) {
            return Some(format!("forest {i}: in-demand at {v}, which is not a start"));
        }
        if let Some(w) = vs.iter().find(|w| req.b.contains(w) && !req.avoid[i].contains(w)) {
            return Some(format!("forest {i} touches B vertex {w} outside its avoid set"));
        }
    }
    None
}

/// Edge-disjoint linear forests `Q_i` meeting every demand of `req`; when
/// `forests` is non-empty each `F_i ∪ Q_i` is checked to be a linear forest.
///
/// The degree hypothesis is checked up front. A Hall failure afterwards
/// contradicts it and is reported as an invariant violation.
pub fn extend_linear_forests(req: &ExtendRequest, forests: &[Vec<Arc>]) -> Result<Vec<Vec<Arc>>> {
    if let Some(why) = req.degree_shortfall() {
        return Err(Error::invalid(why));
    }
    run(req, forests, None)
}

/// Same construction with no degree pre-check. A Hall failure becomes a
/// stage error under `stage`, or an invariant violation when `stage` is `None`.
pub(crate) fn extend_unverified(req: &ExtendRequest, forests: &[Vec<Arc>], stage: Option<&str>) -> Result<Vec<Vec<Arc>>> {
    run(req, forests, stage)
}

fn run(req: &ExtendRequest, forests: &[Vec<Arc>], stage: Option<&str>) -> Result<Vec<Vec<Arc>>> {
    let l = req.len();
    if !forests.is_empty() {
        if forests.len() != l {
            return Err(Error::invalid("one forest per index required"));
        }
        if let Some(why) = forest_violation(req, forests) {
            return Err(Error::invalid(why));
        }
    }
    let fail = |detail: String| match stage {
        Some(s) => Error::stage(s, detail),
        None => Error::invariant("extend: Hall matching", detail),
    };
    let cap = req.cap.floor() as usize;
    let mut q: Vec<Vec<Arc>> = vec![Vec::new(); l];
    let mut q_b: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); l];
    let mut uses: BTreeMap<Vertex, usize> = BTreeMap::new();

    let s_plus: BTreeSet<Vertex> = req.s_plus.iter().flatten().copied().collect();
    let s_minus: BTreeSet<Vertex> = req.s_minus.iter().flatten().copied().collect();
    let tuples = s_plus.iter().map(|&v| (true, v)).chain(s_minus.iter().map(|&v| (false, v)));
    for (out, v) in tuples {
        let sets = if out { &req.s_plus } else { &req.s_minus };
        let y: Vec<usize> = (0..l).filter(|&i| sets[i].contains(&v)).collect();
        let z: Vec<(Arc, Vertex)> = req
            .host
            .iter()
            .filter_map(|&(x, w)| match out {
                true if x == v => Some(((x, w), w)),
                false if w == v => Some(((x, w), x)),
                _ => None,
            })
            .filter(|&(_, w)| uses.get(&w).copied().unwrap_or(0) < cap)
            .collect();
        let mut edges = Vec::new();
        for (yi, &i) in y.iter().enumerate() {
            for (zi, &(_, w)) in z.iter().enumerate() {
                if !q_b[i].contains(&w) && !req.avoid[i].contains(&w) {
                    edges.push((yi, zi));
                }
            }
        }
        let g = BipGraph::new(y.len(), z.len(), edges)?;
        let m = max_matching(&g);
        if m.len() < y.len() {
            let dir = if out { "out" } else { "in" };
            return Err(fail(format!(
                "only {} of {} forests can take an {dir}-arc at {v} ({} usable host arcs)",
                m.len(),
                y.len(),
                z.len()
            )));
        }
        for (yi, zi) in m {
            let (arc, w) = z[zi];
            let i = y[yi];
            q[i].push(arc);
            q_b[i].insert(w);
            *uses.entry(w).or_insert(0) += 1;
        }
    }
    for f in q.iter_mut() {
        f.sort_unstable();
    }
    check_conclusions(req, forests, &q)?;
    Ok(q)
}

/// Recounts the three conclusions and the forest condition from scratch.
pub(crate) fn check_conclusions(req: &ExtendRequest, forests: &[Vec<Arc>], q: &[Vec<Arc>]) -> Result<()> {
    let bad = |d: String| Err(Error::invariant("extend conclusions", d));
    let host: BTreeSet<Arc> = req.host.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut uses: BTreeMap<Vertex, usize> = BTreeMap::new();
    for (i, qi) in q.iter().enumerate() {
        let mut outs = BTreeSet::new();
        let mut ins = BTreeSet::new();
        let mut b_deg: BTreeMap<Vertex, usize> = BTreeMap::new();
        for &(x, y) in qi {
            if !host.contains(&(x, y)) || !seen.insert((x, y)) {
                return bad(format!("Q_{i} uses ({x},{y}) twice or outside the host"));
            }
            let (a_end, b_end, out) = if req.a.contains(&x) { (x, y, true) } else { (y, x, false) };
            if req.avoid[i].contains(&b_end) {
                return bad(format!("Q_{i} meets avoided vertex {b_end}"));
            }
            let fresh = if out { outs.insert(a_end) } else { ins.insert(a_end) };
            if !fresh {
                return bad(format!("Q_{i} has two arcs at {a_end} in one direction"));
            }
            *b_deg.entry(b_end).or_insert(0) += 1;
        }
        if outs != req.s_plus[i] || ins != req.s_minus[i] {
            return bad(format!("Q_{i} does not match its demands exactly"));
        }
        if let Some((w, _)) = b_deg.iter().find(|&(_, &d)| d > 1) {
            return bad(format!("Q_{i} has degree > 1 at B vertex {w}"));
        }
        for w in b_deg.keys() {
            *uses.entry(*w).or_insert(0) += 1;
        }
        if !forests.is_empty() {
            let mut joined = forests[i].clone();
            joined.extend(qi.iter().copied());
            if let Some(why) = linear_forest_violation(&joined) {
                return bad(format!("F_{i} plus Q_{i}: {why}"));
            }
        }
    }
    if let Some((w, &k)) = uses.iter().find(|&(_, &k)| k as f64 > req.cap) {
        return bad(format!("B vertex {w} lies in {k} forests, above N = {}", req.cap));
    }
    Ok(())
}
