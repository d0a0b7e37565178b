//! Turning pseudo-feasible systems into feasible ones whose paths run from
//! U1 to U4, and the full decomposition of the backward and exceptional edges.
//!
//! Each stage is public so it can be exercised on its own. Every stage
//! re-validates its output with the predicates of the parent module.

use std::collections::BTreeSet;

use crate::digraph::{Arc, Vertex};
use crate::error::{Error, Result};
use crate::forest::linear_forest_violation;
use crate::matchwork::{max_matching, BipGraph};

use super::backward::{cover_forward_exceptional, decompose_backward_all};
use super::extend::{extend_unverified, ExtendRequest};
use super::{
    check_disjoint, ends_of, feasibility_violation, is_placeholder, pseudo_violation, starts_of, touched,
    FeasibilityContext,
};

fn sorted(mut arcs: Vec<Arc>) -> Vec<Arc> {
    arcs.sort_unstable();
    arcs.dedup();
    arcs
}

fn union_of(systems: &[Vec<Arc>]) -> BTreeSet<Arc> {
    systems.iter().flatten().copied().collect()
}

fn require_pseudo(systems: &[Vec<Arc>], ctx: &FeasibilityContext) -> Result<()> {
    check_disjoint(systems, "input systems").map_err(|e| Error::invalid(e.to_string()))?;
    for (j, s) in systems.iter().enumerate() {
        if let Some(why) = pseudo_violation(s, ctx) {
            return Err(Error::invalid(format!("system {j} is not pseudo-feasible: {why}")));
        }
    }
    Ok(())
}

fn require_feasible(systems: &[Vec<Arc>], ctx: &FeasibilityContext) -> Result<()> {
    check_disjoint(systems, "input systems").map_err(|e| Error::invalid(e.to_string()))?;
    for (j, s) in systems.iter().enumerate() {
        if let Some(why) = feasibility_violation(s, ctx) {
            return Err(Error::invalid(format!("system {j} is not feasible: {why}")));
        }
    }
    Ok(())
}

fn check_outputs_feasible(systems: &[Vec<Arc>], ctx: &FeasibilityContext, stage: &str) -> Result<()> {
    check_disjoint(systems, stage)?;
    for (j, s) in systems.iter().enumerate() {
        if let Some(why) = feasibility_violation(s, ctx) {
            return Err(Error::invariant(stage, format!("system {j} is not feasible: {why}")));
        }
    }
    Ok(())
}

/// Moves every placeholder to a system that needs an arc of that direction
/// at its U* end, so that each system becomes a linear forest.
///
/// Forward arcs in the input must meet U* and must not be placeholders.
pub fn redistribute_placeholders(systems: &[Vec<Arc>], ctx: &FeasibilityContext) -> Result<Vec<Vec<Arc>>> {
    require_pseudo(systems, ctx)?;
    for &e in systems.iter().flatten() {
        if ctx.is_forward(e) && (!ctx.in_ustar(e.0) && !ctx.in_ustar(e.1) || is_placeholder(e, ctx)) {
            return Err(Error::invalid(format!("forward arc ({},{}) avoids U* or is a placeholder", e.0, e.1)));
        }
    }
    let placeholders: Vec<Arc> = sorted(systems.iter().flatten().copied().filter(|&e| is_placeholder(e, ctx)).collect());
    if placeholders.is_empty() {
        return Ok(systems.iter().map(|s| sorted(s.clone())).collect());
    }
    let stage = "redistribute placeholders";
    let ph: BTreeSet<Arc> = placeholders.iter().copied().collect();
    let rest: Vec<Vec<Arc>> = systems.iter().map(|s| s.iter().copied().filter(|e| !ph.contains(e)).collect()).collect();
    let a: BTreeSet<Vertex> = ctx.exceptional.members().ones().collect();
    let b: BTreeSet<Vertex> = (0..ctx.n_vertices()).filter(|v| !a.contains(v)).collect();
    let mut s_plus = Vec::with_capacity(systems.len());
    let mut s_minus = Vec::with_capacity(systems.len());
    let mut avoid = Vec::with_capacity(systems.len());
    for (s, r) in systems.iter().zip(&rest) {
        s_plus.push(s.iter().filter(|e| ph.contains(e) && a.contains(&e.0)).map(|e| e.0).collect());
        s_minus.push(s.iter().filter(|e| ph.contains(e) && a.contains(&e.1)).map(|e| e.1).collect());
        avoid.push(touched(r).intersection(&b).copied().collect());
    }
    let cap = 2.0 * a.len() as f64;
    let req = ExtendRequest::unchecked(a, b, placeholders, s_plus, s_minus, avoid, cap)?;
    let q = extend_unverified(&req, &rest, Some(stage))?;
    let out: Vec<Vec<Arc>> = rest
        .into_iter()
        .zip(q)
        .map(|(mut r, qi)| {
            r.extend(qi);
            sorted(r)
        })
        .collect();

    check_disjoint(&out, stage)?;
    if union_of(&out) != union_of(systems) {
        return Err(Error::invariant(stage, "the union of the systems changed"));
    }
    for (j, (new, old)) in out.iter().zip(systems).enumerate() {
        if new.len() != old.len() {
            return Err(Error::invariant(stage, format!("system {j} went from {} to {} arcs", old.len(), new.len())));
        }
        if let Some(why) = linear_forest_violation(new) {
            return Err(Error::invariant(stage, format!("system {j} is not a linear forest: {why}")));
        }
        if let Some(why) = pseudo_violation(new, ctx) {
            return Err(Error::invariant(stage, format!("system {j} is not pseudo-feasible: {why}")));
        }
    }
    Ok(out)
}

/// Gives every U* vertex an in- and an out-arc in every system, using forward
/// arcs of `host` between U* and the rest that avoid `U^{1−γ}`.
///
/// Inputs must be pseudo-feasible linear forests.
pub fn cover_exceptional(systems: &[Vec<Arc>], ctx: &FeasibilityContext, host: &[Arc]) -> Result<Vec<Vec<Arc>>> {
    require_pseudo(systems, ctx)?;
    if let Some((j, why)) = systems.iter().enumerate().find_map(|(j, s)| linear_forest_violation(s).map(|w| (j, w))) {
        return Err(Error::invalid(format!("system {j} is not a linear forest: {why}")));
    }
    if ctx.exceptional.is_empty() {
        return Ok(systems.iter().map(|s| sorted(s.clone())).collect());
    }
    let stage = "cover U*";
    let used = union_of(systems);
    let a: BTreeSet<Vertex> = ctx.exceptional.members().ones().collect();
    let b: BTreeSet<Vertex> = (0..ctx.n_vertices()).filter(|v| !a.contains(v)).collect();
    let d_host: Vec<Arc> = sorted(
        host.iter()
            .copied()
            .filter(|&(u, v)| {
                ctx.is_forward((u, v))
                    && !ctx.is_high(u)
                    && !ctx.is_high(v)
                    && ctx.in_ustar(u) != ctx.in_ustar(v)
                    && !used.contains(&(u, v))
            })
            .collect(),
    );
    let mut s_plus = Vec::with_capacity(systems.len());
    let mut s_minus = Vec::with_capacity(systems.len());
    let mut avoid = Vec::with_capacity(systems.len());
    for s in systems {
        let tails: BTreeSet<Vertex> = s.iter().map(|e| e.0).collect();
        let heads: BTreeSet<Vertex> = s.iter().map(|e| e.1).collect();
        s_plus.push(a.iter().copied().filter(|v| !tails.contains(v)).collect());
        s_minus.push(a.iter().copied().filter(|v| !heads.contains(v)).collect());
        avoid.push(touched(s).intersection(&b).copied().collect());
    }
    let cap = 2.0 * a.len() as f64;
    let req = ExtendRequest::unchecked(a, b, d_host, s_plus, s_minus, avoid, cap)?;
    let q = extend_unverified(&req, systems, Some(stage))?;
    let out: Vec<Vec<Arc>> = systems
        .iter()
        .zip(q)
        .map(|(s, qi)| {
            let mut f = s.clone();
            f.extend(qi);
            sorted(f)
        })
        .collect();
    check_outputs_feasible(&out, ctx, stage)?;
    Ok(out)
}

/// Adds the prescribed forward arcs `e` that are not yet used. Systems are
/// grouped by index mod 4, one group per forward pair, and each system takes
/// at most five arcs, all vertex-disjoint from it.
pub fn incorporate_prescribed(systems: &[Vec<Arc>], ctx: &FeasibilityContext, e: &[Arc]) -> Result<Vec<Vec<Arc>>> {
    require_feasible(systems, ctx)?;
    check_prescribed(e, ctx)?;
    let stage = "incorporate E";
    let used = union_of(systems);
    let r = systems.len();
    let spans: Vec<BTreeSet<Vertex>> = systems.iter().map(|s| touched(s)).collect();
    let mut out: Vec<Vec<Arc>> = systems.to_vec();
    for i in 0..4 {
        let a_i: Vec<Arc> = e.iter().copied().filter(|&(u, v)| ctx.index(u) == i && ctx.index(v) == (i + 1) % 4 && !used.contains(&(u, v))).collect();
        if a_i.is_empty() {
            continue;
        }
        let copies: Vec<usize> = (0..r).filter(|j| j % 4 == i).flat_map(|j| [j; 5]).collect();
        let mut edges = Vec::new();
        for (k, &(u, v)) in a_i.iter().enumerate() {
            for (c, &j) in copies.iter().enumerate() {
                if !spans[j].contains(&u) && !spans[j].contains(&v) {
                    edges.push((k, c));
                }
            }
        }
        let g = BipGraph::new(a_i.len(), copies.len(), edges)?;
        let m = max_matching(&g);
        if m.len() < a_i.len() {
            return Err(Error::stage(
                stage,
                format!("only {} of {} prescribed arcs of pair U{}->U{} fit a system", m.len(), a_i.len(), i + 1, (i + 1) % 4 + 1),
            ));
        }
        for (k, c) in m {
            out[copies[c]].push(a_i[k]);
        }
    }
    for s in out.iter_mut() {
        s.sort_unstable();
    }

    check_outputs_feasible(&out, ctx, stage)?;
    let want: BTreeSet<Arc> = used.iter().chain(e).copied().collect();
    if union_of(&out) != want {
        return Err(Error::invariant(stage, "the union is not the old union plus E"));
    }
    if let Some(j) = (0..r).find(|&j| out[j].len() > systems[j].len() + 5) {
        return Err(Error::invariant(stage, format!("system {j} grew by more than 5 arcs")));
    }
    Ok(out)
}

/// `E` must be forward arcs of T avoiding U*, with in- and out-degree at most 1.
fn check_prescribed(e: &[Arc], ctx: &FeasibilityContext) -> Result<()> {
    let nv = ctx.n_vertices();
    let mut outs = BTreeSet::new();
    let mut ins = BTreeSet::new();
    for &(u, v) in e {
        if u >= nv || v >= nv || !ctx.tournament.has_arc(u, v) || !ctx.is_forward((u, v)) {
            return Err(Error::invalid(format!("prescribed ({u},{v}) is not a forward arc of T")));
        }
        if ctx.in_ustar(u) || ctx.in_ustar(v) {
            return Err(Error::invalid(format!("prescribed ({u},{v}) meets U*")));
        }
        if !outs.insert(u) || !ins.insert(v) {
            return Err(Error::invalid(format!("prescribed arcs have degree above 1 at ({u},{v})")));
        }
    }
    Ok(())
}

/// `N = √eps·n`, clamped to `2|A|`; below 1 no extension is possible.
fn stage_cap(eps: f64, n: usize, a: usize, stage: &str) -> Result<f64> {
    let cap = (eps.sqrt() * n as f64).min(2.0 * a as f64);
    if cap < 1.0 {
        return Err(Error::stage(stage, format!("cap N = {cap:.3} is below 1 (eps = {eps}, n = {n}, |A| = {a})")));
    }
    Ok(cap)
}

/// One round of extensions from `class(from)` to `class(to)`, both minus U*.
/// With `at_ends` the paths ending in `from` are extended forwards,
/// otherwise the paths starting in `from` are extended backwards.
fn extend_round(
    systems: &[Vec<Arc>],
    ctx: &FeasibilityContext,
    host: &[Arc],
    eps: f64,
    from: usize,
    to: usize,
    at_ends: bool,
    stage: &str,
) -> Result<Vec<Vec<Arc>>> {
    let a: BTreeSet<Vertex> = ctx.class(from).iter().copied().filter(|&v| !ctx.in_ustar(v)).collect();
    let b: BTreeSet<Vertex> = ctx.class(to).iter().copied().filter(|&v| !ctx.in_ustar(v)).collect();
    let demand: Vec<BTreeSet<Vertex>> = systems
        .iter()
        .map(|s| {
            let pts = if at_ends { ends_of(s) } else { starts_of(s) };
            pts.intersection(&a).copied().collect()
        })
        .collect();
    if demand.iter().all(BTreeSet::is_empty) {
        return Ok(systems.to_vec());
    }
    let used = union_of(systems);
    let d_host: Vec<Arc> = sorted(
        host.iter()
            .copied()
            .filter(|&(u, v)| {
                let (x, y) = if at_ends { (u, v) } else { (v, u) };
                a.contains(&x) && b.contains(&y) && !used.contains(&(u, v))
            })
            .collect(),
    );
    let avoid: Vec<BTreeSet<Vertex>> = systems.iter().map(|s| touched(s).intersection(&b).copied().collect()).collect();
    let empty = vec![BTreeSet::new(); systems.len()];
    let (s_plus, s_minus) = if at_ends { (demand, empty) } else { (empty, demand) };
    let cap = stage_cap(eps, ctx.n(), a.len(), stage)?;
    let req = ExtendRequest::unchecked(a, b, d_host, s_plus, s_minus, avoid, cap)?;
    let q = extend_unverified(&req, systems, Some(stage))?;
    Ok(systems
        .iter()
        .zip(q)
        .map(|(s, qi)| {
            let mut f = s.clone();
            f.extend(qi);
            sorted(f)
        })
        .collect())
}

fn check_host(systems: &[Vec<Arc>], ctx: &FeasibilityContext, host: &[Arc]) -> Result<BTreeSet<Arc>> {
    let h: BTreeSet<Arc> = host.iter().copied().collect();
    let nv = ctx.n_vertices();
    if let Some(&(u, v)) = h.iter().find(|&&(u, v)| u >= nv || v >= nv || !ctx.tournament.has_arc(u, v)) {
        return Err(Error::invalid(format!("host arc ({u},{v}) is not an arc of T")));
    }
    if let Some(&(u, v)) = systems.iter().flatten().find(|a| !h.contains(a)) {
        return Err(Error::invalid(format!("system arc ({u},{v}) is not in the host")));
    }
    Ok(h)
}

/// Extends every path ending in U1, U2 or U3 (outside U*) by forward arcs
/// of `host` until all paths end in U4. Starting points are unchanged.
pub fn extend_endpoints(systems: &[Vec<Arc>], ctx: &FeasibilityContext, host: &[Arc], eps: f64) -> Result<Vec<Vec<Arc>>> {
    require_feasible(systems, ctx)?;
    check_host(systems, ctx, host)?;
    let stage = "extend endpoints";
    let mut cur = systems.to_vec();
    for i in 0..3 {
        cur = extend_round(&cur, ctx, host, eps, i, i + 1, true, stage)?;
    }
    check_outputs_feasible(&cur, ctx, stage)?;
    for (j, (new, old)) in cur.iter().zip(systems).enumerate() {
        if !old.iter().all(|a| new.binary_search(a).is_ok()) {
            return Err(Error::invariant(stage, format!("system {j} lost an arc")));
        }
        if new.len() > 4 * old.len() {
            return Err(Error::invariant(stage, format!("system {j} has {} arcs, above 4 * {}", new.len(), old.len())));
        }
        if starts_of(new) != starts_of(old) {
            return Err(Error::invariant(stage, format!("system {j} changed its starting points")));
        }
        if let Some(v) = ends_of(new).into_iter().find(|&v| ctx.index(v) != 3) {
            return Err(Error::invariant(stage, format!("system {j} still ends at {v} in U{}", ctx.index(v) + 1)));
        }
    }
    Ok(cur)
}

/// Extends every path starting in U4, U3 or U2 (outside U*) backwards by
/// forward arcs of `host` until all paths start in U1. Ending points are
/// unchanged.
pub fn extend_startpoints(systems: &[Vec<Arc>], ctx: &FeasibilityContext, host: &[Arc], eps: f64) -> Result<Vec<Vec<Arc>>> {
    require_feasible(systems, ctx)?;
    check_host(systems, ctx, host)?;
    let stage = "extend starting points";
    let mut cur = systems.to_vec();
    for i in 0..3 {
        cur = extend_round(&cur, ctx, host, eps, 3 - i, 2 - i, false, stage)?;
    }
    check_outputs_feasible(&cur, ctx, stage)?;
    for (j, (new, old)) in cur.iter().zip(systems).enumerate() {
        if !old.iter().all(|a| new.binary_search(a).is_ok()) {
            return Err(Error::invariant(stage, format!("system {j} lost an arc")));
        }
        if new.len() > 4 * old.len() {
            return Err(Error::invariant(stage, format!("system {j} has {} arcs, above 4 * {}", new.len(), old.len())));
        }
        if ends_of(new) != ends_of(old) {
            return Err(Error::invariant(stage, format!("system {j} changed its ending points")));
        }
        if let Some(v) = starts_of(new).into_iter().find(|&v| ctx.index(v) != 0) {
            return Err(Error::invariant(stage, format!("system {j} still starts at {v} in U{}", ctx.index(v) + 1)));
        }
    }
    Ok(cur)
}

/// Turns `r` pseudo-feasible systems inside `host` into `r` feasible ones
/// that cover every backward arc of `host` and every arc of `prescribed`,
/// with all paths running from U1 to U4.
///
/// Hypotheses are checked: minimum semidegree of `host` at least `r`, the
/// backward arcs of `host` and the arcs of `host[U*]` covered, prescribed
/// arcs forward, off U*, and of degree at most 1. The per-system size bound
/// `eps·n` is asymptotic and is not enforced.
pub fn pseudo_to_feasible(
    systems: &[Vec<Arc>],
    ctx: &FeasibilityContext,
    host: &[Arc],
    prescribed: &[Arc],
    eps: f64,
) -> Result<Vec<Vec<Arc>>> {
    let r = systems.len();
    require_pseudo(systems, ctx)?;
    let h = check_host(systems, ctx, host)?;
    check_prescribed(prescribed, ctx)?;
    if let Some(&(u, v)) = prescribed.iter().find(|a| !h.contains(a)) {
        return Err(Error::invalid(format!("prescribed ({u},{v}) is not in the host")));
    }
    let nv = ctx.n_vertices();
    let mut out_deg = vec![0usize; nv];
    let mut in_deg = vec![0usize; nv];
    for &(u, v) in &h {
        out_deg[u] += 1;
        in_deg[v] += 1;
    }
    if let Some(v) = (0..nv).find(|&v| out_deg[v].min(in_deg[v]) < r) {
        return Err(Error::hypothesis("feasible systems", format!("host semidegree at {v} is below r = {r}")));
    }
    let used = union_of(systems);
    let must = h.iter().filter(|&&(u, v)| ctx.is_backward((u, v)) || ctx.in_ustar(u) && ctx.in_ustar(v));
    if let Some(&(u, v)) = must.clone().find(|a| !used.contains(a)) {
        return Err(Error::hypothesis("feasible systems", format!("arc ({u},{v}) must already be covered")));
    }

    // forward arcs avoiding U*, and forward placeholders, can simply be dropped
    let trimmed: Vec<Vec<Arc>> = systems
        .iter()
        .map(|s| {
            s.iter()
                .copied()
                .filter(|&e| !ctx.is_forward(e) || (ctx.in_ustar(e.0) || ctx.in_ustar(e.1)) && !is_placeholder(e, ctx))
                .collect()
        })
        .collect();
    for (j, s) in trimmed.iter().enumerate() {
        if let Some(why) = pseudo_violation(s, ctx) {
            return Err(Error::invariant("trim forward arcs", format!("system {j}: {why}")));
        }
    }
    let f1 = redistribute_placeholders(&trimmed, ctx)?;
    let f2 = cover_exceptional(&f1, ctx, host)?;
    let f3 = incorporate_prescribed(&f2, ctx, prescribed)?;
    let f4 = extend_endpoints(&f3, ctx, host, eps)?;
    let f5 = extend_startpoints(&f4, ctx, host, eps)?;

    let stage = "feasible systems";
    check_outputs_feasible(&f5, ctx, stage)?;
    let all = union_of(&f5);
    if let Some(&(u, v)) = must.chain(prescribed).find(|a| !all.contains(a)) {
        return Err(Error::invariant(stage, format!("arc ({u},{v}) is not covered")));
    }
    if let Some(&(u, v)) = all.iter().find(|a| !h.contains(a)) {
        return Err(Error::invariant(stage, format!("arc ({u},{v}) lies outside the host")));
    }
    for (j, (s, base)) in f5.iter().zip(&f3).enumerate() {
        if s.len() > 7 * base.len() {
            return Err(Error::invariant(stage, format!("system {j} has {} arcs, above 7 * {}", s.len(), base.len())));
        }
        if starts_of(s).iter().any(|&v| ctx.index(v) != 0) || ends_of(s).iter().any(|&v| ctx.index(v) != 3) {
            return Err(Error::invariant(stage, format!("system {j} has a path not running from U1 to U4")));
        }
    }
    Ok(f5)
}

/// `n` edge-disjoint feasible systems covering every backward arc of T, every
/// arc of `T[U*]` and every arc of `prescribed`, with all paths running from
/// U1 to U4.
///
/// `t′` systems cover the forward arcs at the exceptional set, the remaining
/// backward arcs are split into `n − t′` more, and the lot is made feasible.
/// The last step runs with `√eps` as its own accuracy.
pub fn decompose_backward_and_exceptional(ctx: &FeasibilityContext, prescribed: &[Arc], eps: f64) -> Result<Vec<Vec<Arc>>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    let n = ctx.n();
    let base = (ctx.gamma * n as f64).floor() as usize;
    let t_prime = if (n - base.min(n)) % 2 == 0 { base } else { base + 1 };
    if t_prime > n {
        return Err(Error::hypothesis("backward decomposition", format!("t' = {t_prime} exceeds n = {n}")));
    }
    let r = (n - t_prime) / 2;
    let forward = cover_forward_exceptional(ctx, t_prime)?;
    let used = union_of(&forward);
    let rest: Vec<Arc> = ctx.tournament.arcs().into_iter().filter(|&e| ctx.is_backward(e) && !used.contains(&e)).collect();
    let backward = decompose_backward_all(&rest, ctx, r).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::stage("backward decomposition", msg),
        other => other,
    })?;
    let mut systems = forward;
    systems.extend(backward);
    let host = ctx.tournament.arcs();
    let out = pseudo_to_feasible(&systems, ctx, &host, prescribed, eps.sqrt())?;

    let stage = "backward and exceptional decomposition";
    if out.len() != n {
        return Err(Error::invariant(stage, format!("{} systems instead of n = {n}", out.len())));
    }
    let all = union_of(&out);
    let t = &ctx.tournament;
    let missing = t
        .arcs()
        .into_iter()
        .filter(|&(u, v)| ctx.is_backward((u, v)) || ctx.in_ustar(u) && ctx.in_ustar(v))
        .chain(prescribed.iter().copied())
        .find(|a| !all.contains(a));
    if let Some((u, v)) = missing {
        return Err(Error::invariant(stage, format!("arc ({u},{v}) is not covered")));
    }
    Ok(out)
}
