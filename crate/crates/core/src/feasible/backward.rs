//! Pseudo-feasible systems from backward edges: covering the forward edges at
//! the exceptional set, selecting balancing backward matchings, and splitting
//! the remaining backward edges.

use std::collections::{BTreeMap, BTreeSet};

use crate::digraph::{Arc, Vertex};
use crate::error::{Error, Result};
use crate::forest::linear_forest_violation;
use crate::matchwork::{greedy_list_assign, konig_equal_split, max_matching, BipGraph};
use crate::partition::build_optimal_h;

use super::extend::{extend_unverified, ExtendRequest};
use super::movedeg::{move_degree2, Node, NodeEdge};
use super::{backward_pair_counts, check_disjoint, pseudo_violation, touched, FeasibilityContext};

/// Bipartite graph on the tails and heads of `arcs`, with the id maps.
fn bip_of(arcs: &[Arc]) -> (BipGraph, Vec<Vertex>, Vec<Vertex>) {
    let left: Vec<Vertex> = arcs.iter().map(|a| a.0).collect::<BTreeSet<_>>().into_iter().collect();
    let right: Vec<Vertex> = arcs.iter().map(|a| a.1).collect::<BTreeSet<_>>().into_iter().collect();
    let li: BTreeMap<Vertex, usize> = left.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let ri: BTreeMap<Vertex, usize> = right.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges = arcs.iter().map(|&(u, v)| (li[&u], ri[&v])).collect();
    let g = BipGraph { n_left: left.len(), n_right: right.len(), edges };
    (g, left, right)
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

/// Splits a backward subdigraph `D` into `2r` edge-disjoint pseudo-feasible
/// systems.
///
/// Vertices of pair degree above `r` are split into two copies, which keeps
/// every auxiliary graph at maximum degree `r`; each is then cut into `r`
/// matchings and the copies are regrouped so no system sees both.
pub fn decompose_backward_all(d: &[Arc], ctx: &FeasibilityContext, r: usize) -> Result<Vec<Vec<Arc>>> {
    let nv = ctx.n_vertices();
    let mut arcs = d.to_vec();
    arcs.sort_unstable();
    if arcs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("D lists an arc twice"));
    }
    if let Some(&(u, v)) = arcs.iter().find(|&&(u, v)| u >= nv || v >= nv || !ctx.tournament.has_arc(u, v) || !ctx.is_backward((u, v))) {
        return Err(Error::invalid(format!("({u},{v}) is not a backward arc of T")));
    }
    let back = backward_pair_counts(&arcs, &ctx.partition);
    if back[0] != back[2] || back[3] != back[1] {
        return Err(Error::invalid(format!("backward pair counts {back:?} are not balanced")));
    }
    let (out, inn) = degrees(&arcs, nv);
    if let Some(v) = (0..nv).find(|&v| out[v].max(inn[v]) > 2 * r) {
        return Err(Error::invalid(format!("vertex {v} has D-degree {}/{} above 2r = {}", out[v], inn[v], 2 * r)));
    }
    if let Some(v) = (0..nv).find(|&v| ctx.is_high(v) && (out[v] != 2 * r || inn[v] != 2 * r)) {
        return Err(Error::invalid(format!(
            "U^(1-gamma) vertex {v} has D-degree {}/{}, not 2r = {}",
            out[v],
            inn[v],
            2 * r
        )));
    }
    if r == 0 {
        return Ok(Vec::new());
    }

    // per pair p (class p -> class p-1): r matchings of the split graph
    let mut split: Vec<Vec<Vec<NodeEdge>>> = Vec::with_capacity(4);
    for p in 0..4 {
        let pair: Vec<Arc> = arcs.iter().copied().filter(|&(u, _)| ctx.index(u) == p).collect();
        let mut nbrs: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for &(u, v) in &pair {
            nbrs.entry(u).or_default().push(v);
            nbrs.entry(v).or_default().push(u);
        }
        let heavy: BTreeSet<Vertex> = nbrs.iter().filter(|(_, n)| n.len() > r).map(|(&w, _)| w).collect();
        let mut first: BTreeMap<Vertex, BTreeSet<Vertex>> = BTreeMap::new();
        for &w in &heavy {
            if !ctx.in_ustar(w) {
                return Err(Error::hypothesis(
                    "backward split",
                    format!("vertex {w} has pair degree {} > r = {r} but lies outside U*", nbrs[&w].len()),
                ));
            }
            let mut nb = nbrs[&w].clone();
            nb.sort_by_key(|&x| (!ctx.in_ustar(x), x));
            let stars = nb.iter().filter(|&&x| ctx.in_ustar(x)).count();
            let k = nb.len().div_ceil(2).max(stars);
            if k > r {
                return Err(Error::hypothesis(
                    "backward split",
                    format!("vertex {w} has {stars} U* neighbours in its pair, more than r = {r}"),
                ));
            }
            first.insert(w, nb.into_iter().take(k).collect());
        }
        let node = |x: Vertex, other: Vertex| -> Node {
            if !heavy.contains(&x) {
                Node::V(x)
            } else if heavy.contains(&other) || first[&x].contains(&other) {
                Node::W1(x)
            } else {
                Node::W2(x)
            }
        };
        let edges: Vec<NodeEdge> = pair.iter().map(|&(u, v)| (node(u, v), node(v, u))).collect();
        let left: Vec<Node> = edges.iter().map(|e| e.0).collect::<BTreeSet<_>>().into_iter().collect();
        let right: Vec<Node> = edges.iter().map(|e| e.1).collect::<BTreeSet<_>>().into_iter().collect();
        let li: BTreeMap<Node, usize> = left.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let ri: BTreeMap<Node, usize> = right.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let g = BipGraph { n_left: left.len(), n_right: right.len(), edges: edges.iter().map(|e| (li[&e.0], ri[&e.1])).collect() };
        let classes = konig_equal_split(&g, r)
            .map_err(|e| Error::invariant("backward split", format!("split graph of pair {p}: {e}")))?;
        let mut ms: Vec<Vec<NodeEdge>> = classes.into_iter().map(|c| c.into_iter().map(|k| edges[k]).collect()).collect();
        ms.sort_by_key(|m| std::cmp::Reverse(m.len()));
        split.push(ms);
    }
    for j in 0..r {
        if split[0][j].len() != split[2][j].len() || split[3][j].len() != split[1][j].len() {
            return Err(Error::invariant("backward split", format!("matching sizes of round {j} do not pair up")));
        }
    }

    let to_arcs = |es: &[NodeEdge]| -> Vec<Arc> { es.iter().map(|&(a, b)| (a.vertex(), b.vertex())).collect() };
    let minus = |m: &[NodeEdge], k: &[NodeEdge]| -> Vec<NodeEdge> { m.iter().copied().filter(|e| !k.contains(e)).collect() };
    let mut low = Vec::with_capacity(r);
    let mut high = Vec::with_capacity(r);
    for j in 0..r {
        let (k0, k2) = move_degree2(&split[0][j], &split[2][j])?;
        let (k1, k3) = move_degree2(&split[1][j], &split[3][j])?;
        let mut f = to_arcs(&minus(&split[0][j], &k0));
        f.extend(to_arcs(&k1));
        f.extend(to_arcs(&minus(&split[2][j], &k2)));
        f.extend(to_arcs(&k3));
        let mut h = to_arcs(&k0);
        h.extend(to_arcs(&minus(&split[1][j], &k1)));
        h.extend(to_arcs(&k2));
        h.extend(to_arcs(&minus(&split[3][j], &k3)));
        f.sort_unstable();
        h.sort_unstable();
        low.push(f);
        high.push(h);
    }
    low.extend(high);
    let systems = low;

    check_disjoint(&systems, "backward split")?;
    let mut all: Vec<Arc> = systems.iter().flatten().copied().collect();
    all.sort_unstable();
    if all != arcs {
        return Err(Error::invariant("backward split", "systems do not partition D"));
    }
    let bound = 4 * back.iter().max().copied().unwrap_or(0).div_ceil(r);
    for (i, s) in systems.iter().enumerate() {
        if s.len() > bound {
            return Err(Error::invariant("backward split", format!("system {i} has {} arcs, bound {bound}", s.len())));
        }
        if let Some(why) = pseudo_violation(s, ctx) {
            let gn = ctx.gamma * ctx.n() as f64;
            return Err(if (r as f64) <= gn {
                Error::hypothesis("backward split", format!("r = {r} is not above gamma*n = {gn:.3}; system {i}: {why}"))
            } else {
                Error::invariant("backward split", format!("system {i}: {why}"))
            });
        }
    }
    Ok(systems)
}

/// Demands for [`select_backward_matchings`]: for forest `j` and pair `i`
/// (class `i` to class `i-1`), the vertices to avoid and the size of the
/// matching away from `U^{1−γ}`.
#[derive(Clone, Debug, Default)]
pub struct BackwardDemand {
    pub avoid: Vec<[BTreeSet<Vertex>; 4]>,
    pub sizes: Vec<[usize; 4]>,
}

impl BackwardDemand {
    pub fn zero(l: usize) -> Self {
        BackwardDemand { avoid: vec![Default::default(); l], sizes: vec![[0; 4]; l] }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

/// `|U_{i-2}^{1−γ} ∪ U_{i-3}^{1−γ}|` with 0-based classes.
fn opposite_high(ctx: &FeasibilityContext, i: usize) -> usize {
    ctx.high().sets[(i + 2) % 4].len() + ctx.high().sets[(i + 1) % 4].len()
}

/// `ℓ` edge-disjoint backward linear forests: matchings of prescribed sizes
/// away from `U^{1−γ}` (γ read from `ctx`), plus one arc at every vertex of
/// `U^{1−γ}` in each direction not excused by the avoid sets.
///
/// Every hypothesis is checked first; a later shortfall is an invariant
/// violation.
pub fn select_backward_matchings(host: &[Arc], ctx: &FeasibilityContext, demand: &BackwardDemand) -> Result<Vec<Vec<Arc>>> {
    let host = normalise_host(host, ctx, demand)?;
    let nv = ctx.n_vertices();
    let gn = ctx.gamma * ctx.n() as f64;
    if demand.len() as f64 > gn {
        return Err(Error::hypothesis("backward matchings", format!("{} forests exceed gamma*n = {gn:.3}", demand.len())));
    }
    let (out, inn) = degrees(&host, nv);
    for v in 0..nv {
        let (o, i) = (out[v] as f64, inn[v] as f64);
        if ctx.is_high(v) && (o < 2.0 * gn || i < 2.0 * gn) {
            return Err(Error::hypothesis("backward matchings (i)", format!("U^(1-gamma) vertex {v} has H-degree {o}/{i} < 2*gamma*n")));
        }
        if !ctx.is_high(v) && (o > 2.0 * gn || i > 2.0 * gn) {
            return Err(Error::hypothesis("backward matchings (ii)", format!("vertex {v} has H-degree {o}/{i} > 2*gamma*n")));
        }
    }
    for i in 0..4 {
        let k = opposite_high(ctx, i);
        let e = host.iter().filter(|&&(u, v)| ctx.index(u) == i && !ctx.is_high(u) && !ctx.is_high(v)).count();
        if (e as f64) < 109.0 * gn * k as f64 {
            return Err(Error::hypothesis(
                "backward matchings (iii)",
                format!("pair U{}->U{} has {e} arcs off U^(1-gamma), fewer than 109*gamma*n*{k}", i + 1, (i + 3) % 4 + 1),
            ));
        }
        for j in 0..demand.len() {
            let s = demand.avoid[j][i].iter().filter(|&&v| !ctx.is_high(v)).count();
            if s > k || demand.sizes[j][i] > k {
                return Err(Error::hypothesis(
                    "backward matchings (iv)/(v)",
                    format!("forest {j}, pair {i}: avoid set {s} or size {} exceeds {k}", demand.sizes[j][i]),
                ));
            }
        }
    }
    select_unverified(&host, ctx, demand, None)
}

fn normalise_host(host: &[Arc], ctx: &FeasibilityContext, demand: &BackwardDemand) -> Result<Vec<Arc>> {
    let nv = ctx.n_vertices();
    let mut host = host.to_vec();
    host.sort_unstable();
    host.dedup();
    if let Some(&(u, v)) = host.iter().find(|&&(u, v)| u >= nv || v >= nv || !ctx.tournament.has_arc(u, v) || !ctx.is_backward((u, v))) {
        return Err(Error::invalid(format!("host arc ({u},{v}) is not a backward arc of T")));
    }
    if demand.avoid.len() != demand.sizes.len() {
        return Err(Error::invalid("avoid sets and sizes differ in length"));
    }
    for (j, sets) in demand.avoid.iter().enumerate() {
        for (i, s) in sets.iter().enumerate() {
            if let Some(v) = s.iter().find(|&&v| v >= nv || (ctx.index(v) != i && ctx.index(v) != (i + 3) % 4)) {
                return Err(Error::invalid(format!("avoid set ({j},{i}) holds {v}, outside U_i and U_(i-1)")));
            }
        }
    }
    Ok(host)
}

pub(crate) fn select_unverified(
    host: &[Arc],
    ctx: &FeasibilityContext,
    demand: &BackwardDemand,
    stage: Option<&str>,
) -> Result<Vec<Vec<Arc>>> {
    let host = normalise_host(host, ctx, demand)?;
    let fail = |d: String| match stage {
        Some(s) => Error::stage(s, d),
        None => Error::invariant("backward matchings", d),
    };
    let nv = ctx.n_vertices();
    let l = demand.len();
    let gn = ctx.gamma * ctx.n() as f64;
    let cap = (gn / 6.0).floor() as usize;
    let high = |v: Vertex| ctx.is_high(v);

    let mut q: Vec<Vec<Arc>> = vec![Vec::new(); l];
    let mut q_touch: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); l];
    let mut used: BTreeSet<Arc> = BTreeSet::new();
    let mut deg = vec![0usize; nv];
    let mut order: Vec<(usize, usize, usize)> =
        (0..l).flat_map(|j| (0..4).map(move |i| (demand.sizes[j][i], j, i))).collect();
    order.sort_unstable();
    for (m, j, i) in order {
        if m == 0 {
            continue;
        }
        let blocked = |v: Vertex| demand.avoid[j][i].contains(&v) || deg[v] >= cap || q_touch[j].contains(&v);
        let cand: Vec<Arc> = host
            .iter()
            .copied()
            .filter(|&(u, v)| ctx.index(u) == i && !high(u) && !high(v) && !used.contains(&(u, v)))
            .filter(|&(u, v)| !blocked(u) && !blocked(v))
            .collect();
        let (g, left, right) = bip_of(&cand);
        let mut mm: Vec<Arc> = max_matching(&g).into_iter().map(|(a, b)| (left[a], right[b])).collect();
        if mm.len() < m {
            return Err(fail(format!("forest {j}, pair {i}: matching of size {} found, {m} needed", mm.len())));
        }
        mm.sort_unstable();
        mm.truncate(m);
        for &(u, v) in &mm {
            used.insert((u, v));
            deg[u] += 1;
            deg[v] += 1;
            q_touch[j].insert(u);
            q_touch[j].insert(v);
        }
        q[j].extend(mm);
    }
    for f in q.iter_mut() {
        f.sort_unstable();
    }

    let mut forests = q.clone();
    if !ctx.high().is_empty() {
        let a: BTreeSet<Vertex> = ctx.high().members().ones().collect();
        let s_j: Vec<BTreeSet<Vertex>> =
            (0..l).map(|j| demand.avoid[j].iter().flatten().copied().filter(|&v| !high(v)).collect()).collect();
        let x: BTreeSet<Vertex> = (0..nv).filter(|&v| !high(v) && deg[v] as f64 >= gn / 7.0).collect();
        let y: BTreeSet<Vertex> =
            (0..nv).filter(|&v| !high(v) && s_j.iter().filter(|s| s.contains(&v)).count() as f64 >= gn / 7.0).collect();
        let b: BTreeSet<Vertex> = (0..nv).filter(|v| !a.contains(v) && !x.contains(v) && !y.contains(v)).collect();
        let d_host: Vec<Arc> = host
            .iter()
            .copied()
            .filter(|(u, v)| a.contains(u) && b.contains(v) || b.contains(u) && a.contains(v))
            .collect();
        let mut s_plus = vec![BTreeSet::new(); l];
        let mut s_minus = vec![BTreeSet::new(); l];
        let mut avoid = vec![BTreeSet::new(); l];
        for j in 0..l {
            for i in 0..4 {
                s_plus[j].extend(ctx.high().sets[i].iter().copied().filter(|v| !demand.avoid[j][i].contains(v)));
                s_minus[j].extend(ctx.high().sets[(i + 3) % 4].iter().copied().filter(|v| !demand.avoid[j][i].contains(v)));
            }
            avoid[j] = q_touch[j].union(&s_j[j]).copied().filter(|v| b.contains(v)).collect();
        }
        let req = ExtendRequest::unchecked(a.clone(), b, d_host, s_plus, s_minus, avoid, 2.0 * a.len() as f64)?;
        let cover = extend_unverified(&req, &q, stage)?;
        for (f, c) in forests.iter_mut().zip(cover) {
            f.extend(c);
            f.sort_unstable();
        }
    }
    check_selection(&host, ctx, demand, &q, &forests, cap).map_err(|e| match (stage, e) {
        (Some(s), Error::Invariant { detail, .. }) => Error::stage(s, detail),
        (_, e) => e,
    })?;
    Ok(forests)
}

/// Recounts the matching sizes and covers, the degree cap on the first
/// phase, and the per-forest degree bound off `U^{1−γ}`.
fn check_selection(
    host: &[Arc],
    ctx: &FeasibilityContext,
    demand: &BackwardDemand,
    q: &[Vec<Arc>],
    forests: &[Vec<Arc>],
    cap: usize,
) -> Result<()> {
    let bad = |d: String| Err(Error::invariant("backward matchings", d));
    let nv = ctx.n_vertices();
    let high = |v: Vertex| ctx.is_high(v);
    let hs: BTreeSet<Arc> = host.iter().copied().collect();
    check_disjoint(forests, "backward matchings")?;
    let (qo, qi) = degrees(&q.concat(), nv);
    if let Some(v) = (0..nv).find(|&v| !high(v) && qo[v] + qi[v] > cap) {
        return bad(format!("vertex {v} lies on {} first-phase arcs, cap {cap}", qo[v] + qi[v]));
    }
    for (j, f) in forests.iter().enumerate() {
        if let Some(why) = linear_forest_violation(f) {
            return bad(format!("forest {j}: {why}"));
        }
        if let Some(e) = f.iter().find(|e| !hs.contains(e)) {
            return bad(format!("forest {j} uses ({},{}) outside H", e.0, e.1));
        }
        let (o, i) = degrees(f, nv);
        if let Some(v) = (0..nv).find(|&v| !high(v) && o[v] + i[v] > 1) {
            return bad(format!("forest {j} has degree {} at {v}", o[v] + i[v]));
        }
        for p in 0..4 {
            let s = &demand.avoid[j][p];
            let pair: Vec<Arc> = f.iter().copied().filter(|&(u, _)| ctx.index(u) == p).collect();
            if pair.iter().any(|&(u, v)| high(u) && high(v)) {
                return bad(format!("forest {j} joins two U^(1-gamma) vertices"));
            }
            if pair.iter().any(|&(u, v)| (!high(u) && s.contains(&u)) || (!high(v) && s.contains(&v))) {
                return bad(format!("forest {j}, pair {p} meets its avoid set"));
            }
            let plain = pair.iter().filter(|&&(u, v)| !high(u) && !high(v)).count();
            let tails: BTreeSet<Vertex> = pair.iter().map(|a| a.0).filter(|&u| high(u)).collect();
            let heads: BTreeSet<Vertex> = pair.iter().map(|a| a.1).filter(|&v| high(v)).collect();
            let want_t: BTreeSet<Vertex> = ctx.high().sets[p].iter().copied().filter(|v| !s.contains(v)).collect();
            let want_h: BTreeSet<Vertex> = ctx.high().sets[(p + 3) % 4].iter().copied().filter(|v| !s.contains(v)).collect();
            if plain != demand.sizes[j][p] || tails != want_t || heads != want_h || plain + tails.len() + heads.len() != pair.len() {
                return bad(format!("forest {j}, pair {p}: sizes or covers differ from the demand"));
            }
        }
    }
    Ok(())
}

/// `t′` edge-disjoint pseudo-feasible systems covering every forward edge of
/// `T[U*]` and every forward edge at `U^{1−γ}`, balanced with backward edges.
pub fn cover_forward_exceptional(ctx: &FeasibilityContext, t_prime: usize) -> Result<Vec<Vec<Arc>>> {
    let n = ctx.n();
    let gn = ctx.gamma * n as f64;
    let base = gn.floor() as usize;
    if t_prime != base && t_prime != base + 1 {
        return Err(Error::invalid(format!("t' = {t_prime} must be floor(gamma*n) or one more ({base})")));
    }
    let ctx2 = ctx.with_gamma((2.0 * ctx.gamma).min(1.0))?;
    let h2 = ctx2.high();
    if !(0..4).any(|k| h2.sets[(2 + k) % 4].is_empty() && h2.sets[(3 + k) % 4].is_empty()) {
        return Err(Error::hypothesis(
            "forward exceptional",
            "no two consecutive classes are free of U^(1-2gamma); the partition is not optimal",
        ));
    }
    let t = &ctx.tournament;
    let star = |v: Vertex| ctx.in_ustar(v);
    let hi = |v: Vertex| ctx.is_high(v);
    let hi2 = |v: Vertex| h2.contains(v);

    // step 1: forward edges at U^(1-γ), and inside U* at U^(1-2γ), into t' matchings per pair
    let mut rounds: Vec<Vec<Vec<Arc>>> = Vec::with_capacity(4);
    for i in 0..4 {
        let mut pair = Vec::new();
        for &u in ctx.class(i) {
            for v in t.out_nbrs(u).ones() {
                if ctx.index(v) == (i + 1) % 4 && (hi(u) || hi(v) || (hi2(u) && star(v)) || (star(u) && hi2(v))) {
                    pair.push((u, v));
                }
            }
        }
        if pair.is_empty() {
            rounds.push(vec![Vec::new(); t_prime]);
            continue;
        }
        let (g, left, right) = bip_of(&pair);
        let classes = konig_equal_split(&g, t_prime).map_err(|e| {
            Error::hypothesis("forward exceptional", format!("pair U{}->U{} needs more than t' colours: {e}", i + 1, (i + 1) % 4 + 1))
        })?;
        let ms = classes
            .into_iter()
            .map(|c| {
                let mut m: Vec<Arc> = c.into_iter().map(|k| (left[g.edges[k].0], right[g.edges[k].1])).collect();
                m.sort_unstable();
                m
            })
            .collect();
        rounds.push(ms);
    }

    // step 2: backward matchings with 2γ in place of γ
    let opt = build_optimal_h(t, &ctx.partition, ctx2.gamma)?;
    let mut host = opt.arcs;
    for u in 0..ctx.n_vertices() {
        for v in t.out_nbrs(u).ones() {
            if ctx.is_backward((u, v)) && (hi2(u) != hi2(v)) && (star(u) != star(v)) {
                host.push((u, v));
            }
        }
    }
    host.sort_unstable();
    host.dedup();
    let mut demand = BackwardDemand::zero(t_prime);
    for j in 0..t_prime {
        for i in 0..4 {
            let vs: BTreeSet<Vertex> = touched(&rounds[i][j]).union(&touched(&rounds[(i + 2) % 4][j])).copied().collect();
            demand.avoid[j][i] =
                vs.into_iter().filter(|&v| ctx.index(v) == i || ctx.index(v) == (i + 3) % 4).collect();
        }
    }
    for j in 0..t_prime {
        for i in 0..4 {
            let excused = &demand.avoid[j][(i + 2) % 4];
            demand.sizes[j][i] = h2.sets[(i + 2) % 4]
                .iter()
                .chain(&h2.sets[(i + 1) % 4])
                .filter(|v| !excused.contains(v))
                .count();
        }
    }
    let chosen = select_unverified(&host, &ctx2, &demand, Some("forward exceptional: backward selection"))?;
    let mut systems: Vec<Vec<Arc>> = (0..t_prime)
        .map(|j| {
            let mut s: Vec<Arc> = (0..4).flat_map(|i| rounds[i][j].iter().copied()).collect();
            s.extend(chosen[j].iter().copied());
            s.sort_unstable();
            s
        })
        .collect();

    // step 3: list-colour the remaining forward edges inside U*
    let rest: Vec<Arc> = ctx
        .exceptional
        .members()
        .ones()
        .filter(|&u| !hi2(u))
        .flat_map(|u| t.out_nbrs(u).ones().map(move |v| (u, v)))
        .filter(|&(u, v)| star(v) && !hi2(v) && ctx.is_forward((u, v)))
        .collect();
    if !rest.is_empty() {
        let touched_j: Vec<BTreeSet<Vertex>> = systems.iter().map(|s| touched(s)).collect();
        let lists: Vec<Vec<usize>> = rest
            .iter()
            .map(|&(u, v)| (0..t_prime).filter(|&j| !touched_j[j].contains(&u) && !touched_j[j].contains(&v)).collect())
            .collect();
        let colours = greedy_list_assign(&rest, &lists)
            .map_err(|e| Error::stage("forward exceptional: list colouring", e.to_string()))?;
        for (k, &c) in colours.iter().enumerate() {
            systems[c].push(rest[k]);
        }
        for s in systems.iter_mut() {
            s.sort_unstable();
        }
    }
    check_forward_cover(ctx, &ctx2, t_prime, &systems)?;
    Ok(systems)
}

/// Recounts the conclusions of the forward cover.
fn check_forward_cover(ctx: &FeasibilityContext, ctx2: &FeasibilityContext, t_prime: usize, systems: &[Vec<Arc>]) -> Result<()> {
    let stage = "forward exceptional";
    check_disjoint(systems, stage)?;
    let t = &ctx.tournament;
    let all: BTreeSet<Arc> = systems.iter().flatten().copied().collect();
    let h2 = ctx2.high();
    let n_h2 = h2.members().count_ones(..);
    let rest = ctx.exceptional.members().ones().filter(|&v| !h2.contains(v)).count();
    let bound = 6 * n_h2 + rest;
    for (j, s) in systems.iter().enumerate() {
        if let Some(why) = pseudo_violation(s, ctx) {
            return Err(Error::stage(stage, format!("system {j} is not pseudo-feasible: {why}")));
        }
        if s.len() > bound {
            return Err(Error::invariant(stage, format!("system {j} has {} arcs, bound {bound}", s.len())));
        }
    }
    for u in ctx.exceptional.members().ones() {
        for v in t.out_nbrs(u).ones() {
            if ctx.in_ustar(v) && ctx.is_forward((u, v)) && !all.contains(&(u, v)) {
                return Err(Error::invariant(stage, format!("forward arc ({u},{v}) inside U* left uncovered")));
            }
        }
    }
    for v in 0..ctx.n_vertices() {
        let i = ctx.index(v);
        let fwd_out = t.out_nbrs(v).ones().filter(|&w| ctx.index(w) == (i + 1) % 4);
        let fwd_in = t.in_nbrs(v).ones().filter(|&w| ctx.index(w) == (i + 3) % 4);
        if ctx.is_high(v) {
            let lost = fwd_out.map(|w| (v, w)).chain(fwd_in.map(|w| (w, v))).find(|a| !all.contains(a));
            if let Some((a, b)) = lost {
                return Err(Error::invariant(stage, format!("forward arc ({a},{b}) at U^(1-gamma) left uncovered")));
            }
        } else if h2.contains(v) {
            let star_out = t.out_nbrs(v).ones().filter(|&w| ctx.index(w) == (i + 1) % 4 && ctx.in_ustar(w)).count();
            let star_in = t.in_nbrs(v).ones().filter(|&w| ctx.index(w) == (i + 3) % 4 && ctx.in_ustar(w)).count();
            let b_out = all.iter().filter(|&&(a, b)| a == v && ctx.is_backward((a, b))).count();
            let b_in = all.iter().filter(|&&(a, b)| b == v && ctx.is_backward((a, b))).count();
            if b_out + star_out < t_prime || b_in + star_in < t_prime {
                return Err(Error::invariant(stage, format!("backward degree of {v} below t' minus its U* forward degree")));
            }
        }
    }
    Ok(())
}
