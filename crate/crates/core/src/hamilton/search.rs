//! Backtracking search for Hamilton cycles and Hamilton decompositions over
//! `u64` adjacency masks.

use std::cell::Cell;
use std::collections::BTreeSet;

use crate::digraph::{Arc, Digraph, Vertex};
use crate::error::{Error, Result};

/// Default vertex cap for [`exact_hamilton`].
pub const HAMILTON_CAP: usize = 40;
/// Vertex cap for [`exhaustive_decomposition`].
pub const EXHAUSTIVE_DECOMPOSITION_CAP: usize = 14;

const WORD: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Outcome<T> {
    Found(T),
    Absent,
    Exhausted,
}

fn bit(v: usize) -> u64 {
    1u64 << v
}

fn ones(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

fn full(n: usize) -> u64 {
    if n == WORD {
        u64::MAX
    } else {
        bit(n) - 1
    }
}

/// Out- and in-neighbourhood masks of a digraph on at most 64 vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Masks {
    pub out: Vec<u64>,
    pub inn: Vec<u64>,
}

impl Masks {
    pub fn from_arcs(n: usize, arcs: &[Arc]) -> Self {
        let mut m = Masks { out: vec![0; n], inn: vec![0; n] };
        for &(u, v) in arcs {
            m.out[u] |= bit(v);
            m.inn[v] |= bit(u);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs = Vec::new();
        for (u, &m) in self.out.iter().enumerate() {
            arcs.extend(ones(m).map(|v| (u, v)));
        }
        arcs
    }

    pub fn is_empty(&self) -> bool {
        self.out.iter().all(|&m| m == 0)
    }

    fn remove_cycle(&mut self, cycle: &[Vertex]) {
        for (j, &u) in cycle.iter().enumerate() {
            let v = cycle[(j + 1) % cycle.len()];
            self.out[u] &= !bit(v);
            self.inn[v] &= !bit(u);
        }
    }
}

/// Depth-first Hamilton cycle enumeration with required arcs forced.
///
/// Every cycle is reported once, as a vertex sequence beginning at `start`.
/// `budget` counts node expansions and may be shared between searches.
pub(crate) struct CycleSearch<'a> {
    n: usize,
    out: Vec<u64>,
    inn: Vec<u64>,
    start: Vertex,
    budget: &'a Cell<u64>,
    pub exhausted: bool,
}

impl<'a> CycleSearch<'a> {
    /// `None` when the required arcs cannot lie on a common Hamilton cycle:
    /// two arcs leave or enter one vertex, or they close a short cycle.
    pub fn new(masks: &Masks, required: &[Arc], start: Vertex, budget: &'a Cell<u64>) -> Option<Self> {
        let n = masks.n();
        let mut out = masks.out.clone();
        let mut inn = masks.inn.clone();
        let mut succ = vec![None; n];
        let mut pred = vec![None; n];
        for &(u, v) in required {
            if u == v || succ[u].is_some_and(|w| w != v) || pred[v].is_some_and(|w| w != u) {
                return None;
            }
            succ[u] = Some(v);
            pred[v] = Some(u);
        }
        for u in 0..n {
            let mut len = 0;
            let mut x = u;
            while let Some(y) = succ[x] {
                len += 1;
                x = y;
                if x == u {
                    if len < n {
                        return None;
                    }
                    break;
                }
                if len > n {
                    break;
                }
            }
        }
        for u in 0..n {
            if let Some(v) = succ[u] {
                for x in 0..n {
                    if x != u {
                        out[x] &= !bit(v);
                    }
                    if x != v {
                        inn[x] &= !bit(u);
                    }
                }
                out[u] = bit(v);
                inn[v] = bit(u);
            }
        }
        Some(CycleSearch { n, out, inn, start, budget, exhausted: false })
    }

    pub fn run(&mut self, visit: &mut dyn FnMut(&[Vertex]) -> Flow) -> Flow {
        if self.n < 2 || self.start >= self.n {
            return Flow::Continue;
        }
        let mut path = vec![self.start];
        self.dfs(self.start, bit(self.start), &mut path, visit)
    }

    fn dfs(&mut self, cur: Vertex, visited: u64, path: &mut Vec<Vertex>, visit: &mut dyn FnMut(&[Vertex]) -> Flow) -> Flow {
        if self.budget.get() == 0 {
            self.exhausted = true;
            return Flow::Stop;
        }
        self.budget.set(self.budget.get() - 1);
        let all = full(self.n);
        if visited == all {
            if self.out[cur] & bit(self.start) != 0 {
                return visit(path);
            }
            return Flow::Continue;
        }
        let unv = all & !visited;
        let avail_in = unv | bit(cur);
        let avail_out = unv | bit(self.start);
        if self.inn[self.start] & unv == 0 {
            return Flow::Continue;
        }
        let mut forced = None;
        for w in ones(unv) {
            let preds = self.inn[w] & avail_in;
            if preds == 0 || self.out[w] & avail_out == 0 {
                return Flow::Continue;
            }
            if preds == bit(cur) {
                if forced.is_some() {
                    return Flow::Continue;
                }
                forced = Some(w);
            }
        }
        // everything left must be reachable from `cur` inside the unvisited part
        let mut reach = self.out[cur] & unv;
        let mut frontier = reach;
        while frontier != 0 {
            let mut next = 0;
            for w in ones(frontier) {
                next |= self.out[w] & unv;
            }
            next &= !reach;
            reach |= next;
            frontier = next;
        }
        if reach != unv {
            return Flow::Continue;
        }
        let cands = match forced {
            Some(w) => bit(w),
            None => self.out[cur] & unv,
        };
        for w in ones(cands) {
            path.push(w);
            let flow = self.dfs(w, visited | bit(w), path, visit);
            path.pop();
            if flow == Flow::Stop {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }
}

/// True when `cycle` visits every vertex of `0..n` once and each step is an
/// arc of `host`.
pub(crate) fn is_hamilton_in(cycle: &[Vertex], n: usize, host: &dyn Fn(Vertex, Vertex) -> bool) -> bool {
    if cycle.len() != n || n < 2 {
        return false;
    }
    let distinct: BTreeSet<Vertex> = cycle.iter().copied().collect();
    if distinct.len() != n || distinct.iter().any(|&v| v >= n) {
        return false;
    }
    (0..n).all(|j| host(cycle[j], cycle[(j + 1) % n]))
}

pub(crate) fn cycle_arcs(cycle: &[Vertex]) -> Vec<Arc> {
    let k = cycle.len();
    (0..k).map(|j| (cycle[j], cycle[(j + 1) % k])).collect()
}

/// A Hamilton cycle of `d` through every arc of `required`, or `None` if
/// there is none. Arcs of `required` outside `d` count as declared extras.
///
/// The search is complete. The cycle is returned as a vertex sequence.
pub fn exact_hamilton(d: &Digraph, required: &[Arc], cap: usize) -> Result<Option<Vec<Vertex>>> {
    let n = d.n();
    if n > cap.min(WORD) {
        return Err(Error::size("vertices for exact Hamilton search", n, cap.min(WORD)));
    }
    if let Some(&(u, v)) = required.iter().find(|&&(u, v)| u >= n || v >= n) {
        return Err(Error::invalid(format!("required arc ({u},{v}) is out of range")));
    }
    let mut arcs = d.arcs();
    arcs.extend_from_slice(required);
    let masks = Masks::from_arcs(n, &arcs);
    let start = required.first().map_or(0, |a| a.0);
    let budget = Cell::new(u64::MAX);
    let Some(mut search) = CycleSearch::new(&masks, required, start, &budget) else {
        return Ok(None);
    };
    let mut found = None;
    search.run(&mut |c| {
        found = Some(c.to_vec());
        Flow::Stop
    });
    if let Some(c) = &found {
        let ok = is_hamilton_in(c, n, &|u, v| masks.out[u] & bit(v) != 0);
        let req: BTreeSet<Arc> = cycle_arcs(c).into_iter().collect();
        if !ok || required.iter().any(|a| !req.contains(a)) {
            return Err(Error::invariant("exact Hamilton", "search returned a cycle that does not recheck"));
        }
    }
    Ok(found)
}

/// Hamilton decomposition search: take the least remaining arc as pivot,
/// enumerate the Hamilton cycles through it, recurse on the residual.
pub(crate) fn decomposition_search(masks: &Masks, budget: &Cell<u64>) -> Outcome<Vec<Vec<Vertex>>> {
    if masks.is_empty() {
        return Outcome::Found(Vec::new());
    }
    let n = masks.n();
    let r = masks.out[0].count_ones();
    if (0..n).any(|v| masks.out[v].count_ones() != r || masks.inn[v].count_ones() != r) {
        return Outcome::Absent;
    }
    let pivot = masks.arcs()[0];
    let Some(mut search) = CycleSearch::new(masks, &[pivot], pivot.0, budget) else {
        return Outcome::Absent;
    };
    let mut result = Outcome::Absent;
    search.run(&mut |c| {
        let mut rest = masks.clone();
        rest.remove_cycle(c);
        match decomposition_search(&rest, budget) {
            Outcome::Found(mut cycles) => {
                cycles.insert(0, c.to_vec());
                result = Outcome::Found(cycles);
                Flow::Stop
            }
            Outcome::Exhausted => {
                result = Outcome::Exhausted;
                Flow::Stop
            }
            Outcome::Absent => Flow::Continue,
        }
    });
    if search.exhausted && result == Outcome::Absent {
        return Outcome::Exhausted;
    }
    result
}

/// A Hamilton decomposition of `d`, or `None` as a proof that none exists.
pub fn exhaustive_decomposition(d: &Digraph) -> Result<Option<Vec<Vec<Vertex>>>> {
    if d.n() > EXHAUSTIVE_DECOMPOSITION_CAP {
        return Err(Error::size("vertices for exhaustive decomposition", d.n(), EXHAUSTIVE_DECOMPOSITION_CAP));
    }
    let masks = Masks::from_arcs(d.n(), &d.arcs());
    match decomposition_search(&masks, &Cell::new(u64::MAX)) {
        Outcome::Found(c) => Ok(Some(c)),
        Outcome::Absent => Ok(None),
        Outcome::Exhausted => Err(Error::invariant("exhaustive decomposition", "unbounded search ran out of budget")),
    }
}
