//! Hamilton cycles through feasible systems in a near blow-up of `C_4`, and
//! the decomposition driver.

use std::cell::Cell;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::expander::{classify_two_cases, ExpansionCertificate};
use super::search::{cycle_arcs, decomposition_search, exact_hamilton, Masks, Outcome};
use super::{cycle_balance, verify_decomposition, DecompositionReport, Status};
use crate::digraph::{is_regular, Arc, Digraph, Side, Vertex};
use crate::error::{Error, Result};
use crate::feasible::{decompose_backward_and_exceptional, feasibility_violation, FeasibilityContext};
use crate::forest::LinearForest;
use crate::matchwork::{close_hamilton, contract, max_matching, BipGraph, ContractionMap};
use crate::params::Params;
use crate::partition::{exceptional_set, optimal_partition, PartitionMode, EXACT_CLASS_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Largest accepted `4n`.
    pub cap: usize,
    /// Instances with at most this many vertices fall back to a
    /// whole-instance search when the structured branch gets stuck.
    pub fallback: usize,
    /// Node expansions for the structured branch's backtracking.
    pub budget: u64,
    /// Node expansions for the whole-instance search.
    pub fallback_budget: u64,
    /// Randomized restarts per cycle before backtracking.
    pub attempts: usize,
    pub seed: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { cap: 32, fallback: 16, budget: 100_000, fallback_budget: 20_000_000, attempts: 12, seed: 0 }
    }
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    x ^= x >> 31;
    x.wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Perfect matching between `left` and `right` inside `edges`, with ties
/// broken by a seeded shuffle. `None` if there is none.
fn perfect_matching(left: &[Vertex], right: &[Vertex], edges: &[Arc], rng: &mut ChaCha8Rng) -> Option<Vec<Arc>> {
    if left.len() != right.len() {
        return None;
    }
    let mut l = left.to_vec();
    let mut r = right.to_vec();
    l.shuffle(rng);
    r.shuffle(rng);
    let pos = |xs: &[Vertex], v: Vertex| xs.iter().position(|&x| x == v);
    let mut local: Vec<(usize, usize)> =
        edges.iter().filter_map(|&(u, v)| Some((pos(&l, u)?, pos(&r, v)?))).collect();
    local.shuffle(rng);
    let g = BipGraph::new(l.len(), r.len(), local).ok()?;
    let m = max_matching(&g);
    (m.len() == l.len()).then(|| m.into_iter().map(|(i, j)| (l[i], r[j])).collect())
}

/// A Hamilton cycle of `d ∪ f` containing every arc of the feasible system
/// `f`, or `None` when the stages below find no completion.
///
/// Perfect matchings `U1→U2`, `U2→U3`, `U3→U4` of `d` extend the arcs of `f`
/// there. The resulting paths from U1 to U4 are contracted to their ends and
/// an exact search closes them up through `d(U4, U1)`.
pub fn blowup_c4_hamilton(d: &Digraph, ctx: &FeasibilityContext, f: &[Arc], seed: u64) -> Result<Option<Vec<Vertex>>> {
    if let Some(why) = feasibility_violation(f, ctx) {
        return Err(Error::invalid(format!("required system is not feasible: {why}")));
    }
    let nv = ctx.n_vertices();
    if d.n() != nv {
        return Err(Error::invalid("host and frame have different vertex counts"));
    }
    if let Some((u, v)) = d.arcs().into_iter().find(|&e| !ctx.is_forward(e)) {
        return Err(Error::invalid(format!("host arc ({u},{v}) is not forward")));
    }
    let mut has_out = vec![false; nv];
    let mut has_in = vec![false; nv];
    for &(u, v) in f {
        has_out[u] = true;
        has_in[v] = true;
    }
    let f_set: BTreeSet<Arc> = f.iter().copied().collect();
    let host: Vec<Arc> = d.arcs().into_iter().filter(|e| !f_set.contains(e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut system: Vec<Arc> = f.to_vec();
    for i in 0..3 {
        let left: Vec<Vertex> = ctx.class(i).iter().copied().filter(|&v| !has_out[v]).collect();
        let right: Vec<Vertex> = ctx.class(i + 1).iter().copied().filter(|&v| !has_in[v]).collect();
        let Some(m) = perfect_matching(&left, &right, &host, &mut rng) else {
            return Ok(None);
        };
        system.extend(m);
    }
    let Ok(paths) = LinearForest::new(0..nv, &system) else {
        return Ok(None);
    };
    let paths = paths.paths();
    let cycle = if paths.len() == 1 {
        let p = &paths[0];
        let (s, e) = (p[0], p[p.len() - 1]);
        if !(d.has_arc(e, s) || f_set.contains(&(e, s))) {
            return Ok(None);
        }
        p.clone()
    } else {
        let starts: Vec<Vertex> = paths.iter().map(|p| p[0]).collect();
        let ends: Vec<Vertex> = paths.iter().map(|p| p[p.len() - 1]).collect();
        if starts.iter().any(|&s| ctx.index(s) != 0) || ends.iter().any(|&e| ctx.index(e) != 3) {
            return Err(Error::invariant("blow-up Hamilton", "a path does not run from U1 to U4"));
        }
        let joins: Vec<Arc> = host.iter().copied().filter(|(u, v)| ends.contains(u) && starts.contains(v)).collect();
        let m = ContractionMap::new(nv, &ends, &starts, &starts.iter().copied().zip(ends.iter().copied()).collect::<Vec<_>>())?;
        let aux = contract(&joins, &m)?;
        let local = |v: Vertex| ends.iter().position(|&e| e == v).unwrap();
        let aux_local: Vec<Arc> = aux.iter().map(|&(a, b)| (local(a), local(b))).collect();
        let aux_d = Digraph::from_arcs(vec![0; ends.len()], 1, &aux_local)?;
        let Some(c) = exact_hamilton(&aux_d, &[], ends.len().max(1))? else {
            return Ok(None);
        };
        let c: Vec<Vertex> = c.into_iter().map(|i| ends[i]).collect();
        // close_hamilton interleaves each end with the start of the next path
        let closed = close_hamilton(&c, &m)?;
        let mut order = Vec::with_capacity(nv);
        for pair in closed.chunks(2) {
            let s = pair[1];
            let p = paths.iter().find(|p| p[0] == s).unwrap();
            order.extend_from_slice(p);
        }
        order
    };
    check_cycle(&cycle, d, f, nv, "blow-up Hamilton")?;
    Ok(Some(cycle))
}

fn check_cycle(cycle: &[Vertex], d: &Digraph, f: &[Arc], nv: usize, name: &str) -> Result<()> {
    let distinct: BTreeSet<Vertex> = cycle.iter().copied().collect();
    if cycle.len() != nv || distinct.len() != nv {
        return Err(Error::invariant(name, "result is not a Hamilton cycle"));
    }
    let arcs: BTreeSet<Arc> = cycle_arcs(cycle).into_iter().collect();
    let f_set: BTreeSet<Arc> = f.iter().copied().collect();
    if let Some((u, v)) = arcs.iter().find(|&&(u, v)| !d.has_arc(u, v) && !f_set.contains(&(u, v))) {
        return Err(Error::invariant(name, format!("({u},{v}) is outside the host")));
    }
    if let Some((u, v)) = f.iter().find(|a| !arcs.contains(a)) {
        return Err(Error::invariant(name, format!("required arc ({u},{v}) is missing")));
    }
    Ok(())
}

/// Chronological backtracking over `levels` cycles. `propose(level, residual,
/// seed)` offers one candidate cycle; each level gets `attempts` seeds.
struct Backtrack<'a> {
    levels: usize,
    attempts: usize,
    seed: u64,
    budget: u64,
    spent: u64,
    best: Vec<Vec<Vertex>>,
    propose: &'a mut dyn FnMut(usize, &BTreeSet<Arc>, u64) -> Result<Option<Vec<Vertex>>>,
}

impl Backtrack<'_> {
    fn run(&mut self, level: usize, residual: &BTreeSet<Arc>, prefix: &mut Vec<Vec<Vertex>>) -> Result<bool> {
        if level == self.levels {
            return Ok(true);
        }
        let mut tried: BTreeSet<Vec<Vertex>> = BTreeSet::new();
        for a in 0..self.attempts {
            if self.spent >= self.budget {
                return Ok(false);
            }
            self.spent += 1;
            let seed = mix(self.seed, level as u64, a as u64);
            let Some(c) = (self.propose)(level, residual, seed)? else {
                continue;
            };
            if !tried.insert(c.clone()) {
                continue;
            }
            let mut rest = residual.clone();
            for e in cycle_arcs(&c) {
                rest.remove(&e);
            }
            prefix.push(c);
            if prefix.len() > self.best.len() {
                self.best = prefix.clone();
            }
            if self.run(level + 1, &rest, prefix)? {
                return Ok(true);
            }
            prefix.pop();
        }
        Ok(false)
    }
}

enum Branch {
    Done(Vec<Vec<Vertex>>),
    Stuck(Vec<Vec<Vertex>>, String),
}

/// Errors that mean "this route does not apply at this size" rather than a bug.
fn expected(e: &Error) -> bool {
    matches!(e, Error::Hypothesis { .. } | Error::Stage { .. } | Error::Infeasible(_) | Error::SizeLimit { .. })
}

fn close_branch(t: &Digraph, ctx_part: &crate::partition::QuadPartition, params: &Params, opts: &DecomposeOptions) -> Result<Branch> {
    let ex = exceptional_set(t, ctx_part, params.eps_prime)?;
    let ctx = FeasibilityContext::new(t.clone(), ctx_part.clone(), ex, params.gamma)?;
    let systems = decompose_backward_and_exceptional(&ctx, &[], params.eps)?;
    let used: BTreeSet<Arc> = systems.iter().flatten().copied().collect();
    let forward: BTreeSet<Arc> = t.arcs().into_iter().filter(|&e| ctx.is_forward(e) && !used.contains(&e)).collect();
    let mut propose = |level: usize, residual: &BTreeSet<Arc>, seed: u64| -> Result<Option<Vec<Vertex>>> {
        let d = t.with_arcs(&residual.iter().copied().collect::<Vec<_>>())?;
        blowup_c4_hamilton(&d, &ctx, &systems[level], seed)
    };
    let mut bt = Backtrack {
        levels: systems.len(),
        attempts: opts.attempts,
        seed: opts.seed,
        budget: opts.budget,
        spent: 0,
        best: Vec::new(),
        propose: &mut propose,
    };
    let mut prefix = Vec::new();
    if bt.run(0, &forward, &mut prefix)? {
        Ok(Branch::Done(prefix))
    } else {
        Ok(Branch::Stuck(bt.best.clone(), format!("close branch stuck after {} expansions", bt.spent)))
    }
}

/// One Hamilton cycle from a perfect matching `B → A` of `residual`, the
/// contraction onto A, and an exact search there.
fn matching_cycle(t: &Digraph, residual: &BTreeSet<Arc>, seed: u64) -> Result<Option<Vec<Vertex>>> {
    let a = t.side_members(Side::A);
    let b = t.side_members(Side::B);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let into_a: Vec<Arc> = residual.iter().copied().filter(|&(u, _)| t.side(u) == Side::B).collect();
    let Some(m) = perfect_matching(&b, &a, &into_a, &mut rng) else {
        return Ok(None);
    };
    let map = ContractionMap::new(t.n(), &a, &b, &m)?;
    let out_of_a: Vec<Arc> = residual.iter().copied().filter(|&(u, _)| t.side(u) == Side::A).collect();
    let aux = contract(&out_of_a, &map)?;
    let local = |v: Vertex| a.iter().position(|&x| x == v).unwrap();
    let aux_local: Vec<Arc> = aux.iter().map(|&(x, y)| (local(x), local(y))).collect();
    let aux_d = Digraph::from_arcs(vec![0; a.len()], 1, &aux_local)?;
    let Some(c) = exact_hamilton(&aux_d, &[], a.len())? else {
        return Ok(None);
    };
    let c: Vec<Vertex> = c.into_iter().map(|i| a[i]).collect();
    let cycle = close_hamilton(&c, &map)?;
    let host = t.with_arcs(&residual.iter().copied().collect::<Vec<_>>())?;
    check_cycle(&cycle, &host, &[], t.n(), "expander branch")?;
    Ok(Some(cycle))
}

fn expander_branch(t: &Digraph, r: usize, opts: &DecomposeOptions) -> Result<Branch> {
    let all: BTreeSet<Arc> = t.arcs().into_iter().collect();
    let mut propose = |_: usize, residual: &BTreeSet<Arc>, seed: u64| matching_cycle(t, residual, seed);
    let mut bt = Backtrack {
        levels: r,
        attempts: opts.attempts,
        seed: opts.seed,
        budget: opts.budget,
        spent: 0,
        best: Vec::new(),
        propose: &mut propose,
    };
    let mut prefix = Vec::new();
    if bt.run(0, &all, &mut prefix)? {
        Ok(Branch::Done(prefix))
    } else {
        Ok(Branch::Stuck(bt.best.clone(), format!("expander branch stuck after {} expansions", bt.spent)))
    }
}

/// Hamilton decomposition of a regular bipartite tournament.
///
/// The two-cases classification picks the route: close instances go through
/// feasible systems and [`blowup_c4_hamilton`], expanders through matchings
/// and contraction. Small instances fall back to a whole-instance search when
/// that route gets stuck, which also makes `Infeasible` a proof.
pub fn decompose_tournament(t: &Digraph, params: &Params, opts: &DecomposeOptions) -> Result<DecompositionReport> {
    params.validate()?;
    if !t.is_bipartite() {
        return Err(Error::invalid("input is not bipartite"));
    }
    if !t.is_tournament() {
        return Err(Error::invalid("input is not a bipartite tournament"));
    }
    let side = t.side_members(Side::A).len();
    let n = side / 2;
    if side != t.side_members(Side::B).len() || side % 2 != 0 || is_regular(t) != Some(n) {
        return Err(Error::invalid("input is not an n-regular tournament with classes of size 2n"));
    }
    if t.n() > opts.cap {
        return Err(Error::size("vertices for decomposition", t.n(), opts.cap));
    }
    let mode = if side <= EXACT_CLASS_CAP { PartitionMode::Exact } else { PartitionMode::Local };
    let u = if n > 0 { Some(optimal_partition(t, mode)?) } else { None };
    let certificate = if n > 0 { Some(classify_two_cases(t, params.nu_prime, params.tau)?) } else { None };
    let mut notes = Vec::new();

    let branch = match (&certificate, &u) {
        (Some(ExpansionCertificate::Close { .. }), Some(u)) => {
            notes.push("close".to_string());
            close_branch(t, u, params, opts)
        }
        (Some(ExpansionCertificate::Expander { .. }), _) => {
            notes.push("expander".to_string());
            expander_branch(t, n, opts)
        }
        _ => Ok(Branch::Done(Vec::new())),
    };
    let branch = match branch {
        Ok(b) => b,
        Err(e) if expected(&e) => Branch::Stuck(Vec::new(), e.to_string()),
        Err(e) => return Err(e),
    };
    let (status, cycles) = match branch {
        Branch::Done(c) => (Status::Complete, c),
        Branch::Stuck(best, why) => {
            notes.push(why);
            if t.n() <= opts.fallback {
                notes.push("whole-instance search".to_string());
                let masks = Masks::from_arcs(t.n(), &t.arcs());
                match decomposition_search(&masks, &Cell::new(opts.fallback_budget)) {
                    Outcome::Found(c) => (Status::Complete, c),
                    Outcome::Absent => (Status::Infeasible, Vec::new()),
                    Outcome::Exhausted => {
                        notes.push("whole-instance search ran out of budget".to_string());
                        (Status::Partial, best)
                    }
                }
            } else {
                (Status::Partial, best)
            }
        }
    };

    let rep = verify_decomposition(t, &cycles, u.as_ref());
    let used: BTreeSet<Arc> = cycles.iter().flat_map(|c| cycle_arcs(c)).collect();
    let residual: Vec<Arc> = t.arcs().into_iter().filter(|e| !used.contains(e)).collect();
    match status {
        Status::Complete if !rep.ok() => {
            return Err(Error::invariant("decomposition", rep.violations.join("; ")));
        }
        Status::Partial => {
            let stray: Vec<&String> = rep.violations.iter().filter(|v| !v.ends_with("is on no cycle")).collect();
            if !stray.is_empty() {
                return Err(Error::invariant("partial decomposition", format!("{stray:?}")));
            }
        }
        _ => {}
    }
    let diagnostics = match &u {
        Some(u) => cycles.iter().map(|c| cycle_balance(c, u)).collect(),
        None => Vec::new(),
    };
    Ok(DecompositionReport { status, cycles, residual, partition: u, certificate, diagnostics, notes })
}
