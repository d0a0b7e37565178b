use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::digraph::{make_blowup_cycle, one_flipped_c4, random_regular_bitournament};
use crate::partition::{exceptional_set, optimal_partition, PartitionMode};

fn native_ctx(d: &Digraph, ustar: &[Vertex], gamma: f64) -> FeasibilityContext {
    let p = QuadPartition::native(d).unwrap();
    let ex = ExceptionalSet::from_members(&p, d.n(), ustar).unwrap();
    FeasibilityContext::new(d.clone(), p, ex, gamma).unwrap()
}

// ---- independent oracles ----

fn class_step(d: &Digraph, u: Vertex, v: Vertex) -> i64 {
    let (a, b) = (d.class_of(u) as i64, d.class_of(v) as i64);
    match (b - a).rem_euclid(4) {
        1 => 1,
        3 => -1,
        _ => panic!("arc does not join adjacent classes"),
    }
}

fn oracle_backward_out(d: &Digraph, v: Vertex) -> usize {
    d.out_nbrs(v).ones().filter(|&w| class_step(d, v, w) == -1).count()
}

fn oracle_placeholder(d: &Digraph, star: &BTreeSet<Vertex>, gamma: f64, (u, v): Arc) -> bool {
    let n = d.n() / 4;
    let gn = gamma * n as f64;
    if star.contains(&u) && !star.contains(&v) {
        d.out_nbrs(u).ones().filter(|&w| d.class_of(w) == d.class_of(v)).count() as f64 > gn
    } else if !star.contains(&u) && star.contains(&v) {
        d.in_nbrs(v).ones().filter(|&w| d.class_of(w) == d.class_of(u)).count() as f64 > gn
    } else {
        false
    }
}

/// Every simple directed cycle, each listed once from its smallest vertex.
fn all_cycles(arcs: &[Arc]) -> Vec<Vec<Vertex>> {
    let mut adj: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for &(u, v) in arcs {
        adj.entry(u).or_default().push(v);
    }
    let mut out = Vec::new();
    fn walk(
        adj: &BTreeMap<Vertex, Vec<Vertex>>,
        start: Vertex,
        path: &mut Vec<Vertex>,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        let last = *path.last().unwrap();
        for &w in adj.get(&last).map(Vec::as_slice).unwrap_or(&[]) {
            if w == start {
                out.push(path.clone());
            } else if w > start && !path.contains(&w) {
                path.push(w);
                walk(adj, start, path, out);
                path.pop();
            }
        }
    }
    for &s in adj.keys() {
        walk(&adj, s, &mut vec![s], &mut out);
    }
    out
}

fn oracle_f1(d: &Digraph, arcs: &[Arc]) -> bool {
    let mut back = [0usize; 4];
    for &(u, v) in arcs {
        if class_step(d, u, v) == -1 {
            back[d.class_of(u)] += 1;
        }
    }
    back[0] == back[2] && back[1] == back[3]
}

fn oracle_pseudo(d: &Digraph, star: &BTreeSet<Vertex>, gamma: f64, arcs: &[Arc]) -> bool {
    let n = d.n() / 4;
    let set: BTreeSet<Arc> = arcs.iter().copied().collect();
    if set.len() != arcs.len() || arcs.iter().any(|&(u, v)| !d.has_arc(u, v)) || !oracle_f1(d, arcs) {
        return false;
    }
    for v in 0..d.n() {
        let o = arcs.iter().filter(|a| a.0 == v).count();
        let i = arcs.iter().filter(|a| a.1 == v).count();
        if star.contains(&v) {
            let high = oracle_backward_out(d, v) as f64 > (1.0 - gamma) * n as f64;
            if o > 1 || i > 1 || high && (o != 1 || i != 1) {
                return false;
            }
        } else {
            let so = arcs.iter().filter(|&&a| a.0 == v && !oracle_placeholder(d, star, gamma, a)).count();
            let si = arcs.iter().filter(|&&a| a.1 == v && !oracle_placeholder(d, star, gamma, a)).count();
            if so > 1 || si > 1 {
                return false;
            }
        }
    }
    all_cycles(arcs).iter().all(|c| {
        (0..c.len()).any(|k| oracle_placeholder(d, star, gamma, (c[k], c[(k + 1) % c.len()])))
    })
}

fn oracle_feasible(d: &Digraph, star: &BTreeSet<Vertex>, arcs: &[Arc]) -> bool {
    let set: BTreeSet<Arc> = arcs.iter().copied().collect();
    if set.len() != arcs.len() || arcs.iter().any(|&(u, v)| !d.has_arc(u, v)) || !oracle_f1(d, arcs) {
        return false;
    }
    for v in 0..d.n() {
        let o = arcs.iter().filter(|a| a.0 == v).count();
        let i = arcs.iter().filter(|a| a.1 == v).count();
        if o > 1 || i > 1 || star.contains(&v) && (o != 1 || i != 1) {
            return false;
        }
    }
    all_cycles(arcs).is_empty()
}

// ---- predicates ----

#[test]
fn empty_system_is_feasible() {
    let d = make_blowup_cycle(4, 2).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    assert!(is_feasible(&[], &ctx));
    assert!(is_pseudo_feasible(&[], &ctx));
}

#[test]
fn flipped_c4_pairing_is_feasible() {
    let n = 3;
    let d = one_flipped_c4(n).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let first = vec![(n, 0), (3 * n, 2 * n)];
    let second = vec![(0, 3 * n), (2 * n, n)];
    assert!(is_feasible(&first, &ctx));
    assert!(is_feasible(&second, &ctx));
    assert!(balanced_special_cover_check(&first, &ctx).unwrap());
    let lone = vec![(0, 3 * n)];
    assert!(feasibility_violation(&lone, &ctx).unwrap().starts_with("F1"));
}

#[test]
fn covers_need_internal_vertices_in_ustar() {
    let d = make_blowup_cycle(4, 2).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    // the path U1 -> U2 -> U3 has an internal vertex outside U*, so it is no cover
    let path = vec![(0, 2), (2, 4)];
    assert!(is_feasible(&path, &ctx));
    assert!(matches!(balanced_special_cover_check(&path, &ctx), Err(Error::InvalidArgument(_))));
    assert!(balanced_special_cover_check(&[(0, 2)], &ctx).unwrap());
    assert!(balanced_special_cover_check(&[(0, 2), (5, 7)], &ctx).unwrap());
}

#[test]
fn unequal_slices_are_rejected() {
    let d = make_blowup_cycle(4, 2).unwrap();
    let p = QuadPartition::native(&d).unwrap();
    assert!(ExceptionalSet::from_members(&p, 8, &[0]).is_err());
}

fn random_subset(rng: &mut ChaCha8Rng, arcs: &[Arc], k: usize) -> Vec<Arc> {
    let mut s: Vec<Arc> = arcs.choose_multiple(rng, k).copied().collect();
    s.sort_unstable();
    s
}

#[test]
fn predicates_agree_with_cycle_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut yes_p, mut no_p) = (0, 0);
    for seed in 0..30 {
        let d = random_regular_bitournament(3, 8, seed).unwrap();
        let star_v: Vec<Vertex> = (0..4).map(|i| 3 * i + (seed as usize % 3)).collect();
        let ctx = native_ctx(&d, &star_v, 0.25);
        let star: BTreeSet<Vertex> = star_v.iter().copied().collect();
        let arcs = d.arcs();
        for _ in 0..200 {
            let k = rng.gen_range(0..9);
            let s = random_subset(&mut rng, &arcs, k);
            let p = oracle_pseudo(&d, &star, 0.25, &s);
            assert_eq!(is_pseudo_feasible(&s, &ctx), p, "pseudo verdict differs on {s:?}");
            let f = oracle_feasible(&d, &star, &s);
            assert_eq!(is_feasible(&s, &ctx), f, "feasible verdict differs on {s:?}");
            yes_p += p as usize;
            no_p += !p as usize;
        }
    }
    assert!(yes_p > 0 && no_p > 0, "{yes_p} pseudo-feasible, {no_p} not");
}

#[test]
fn pseudo_feasible_cycles_need_placeholders() {
    // the forward 4-cycle through one vertex per class has no placeholder
    let d = make_blowup_cycle(4, 3).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let cycle = vec![(0, 3), (3, 6), (6, 9), (9, 0)];
    assert!(pseudo_violation(&cycle, &ctx).unwrap().starts_with("F4'"));
}

#[test]
fn cycle_constant_is_the_winding_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 12;
    let d = make_blowup_cycle(4, n).unwrap();
    let p = QuadPartition::native(&d).unwrap();
    let mut checked = 0;
    while checked < 300 {
        let len = rng.gen_range(2..20);
        let steps: Vec<i64> = (0..len).map(|_| if rng.gen_bool(0.6) { 1 } else { -1 }).collect();
        let net: i64 = steps.iter().sum();
        if net.rem_euclid(4) != 0 {
            continue;
        }
        let mut next = [0usize; 4];
        let mut class = 0i64;
        let mut cycle = Vec::new();
        let mut ok = true;
        for s in &steps {
            let c = class.rem_euclid(4) as usize;
            if next[c] == n {
                ok = false;
                break;
            }
            cycle.push(c * n + next[c]);
            next[c] += 1;
            class += s;
        }
        if !ok || cycle.len() < 2 {
            continue;
        }
        assert_eq!(cycle_ell(&cycle, &p).unwrap(), net / 4, "cycle {cycle:?}");
        checked += 1;
    }
}

#[test]
fn cycle_through_backward_pair() {
    let d = make_blowup_cycle(4, 2).unwrap();
    let p = QuadPartition::native(&d).unwrap();
    // U1 -> U2 -> U1 -> U2 -> U1 winds zero times
    assert_eq!(cycle_ell(&[0, 2, 1, 3], &p).unwrap(), 0);
    assert_eq!(cycle_ell(&[0, 2, 4, 6], &p).unwrap(), 1);
    assert!(cycle_ell(&[0, 4], &p).is_err());
}

#[test]
fn forward_placeholders_avoid_the_high_set() {
    for seed in 0..20 {
        let d = random_regular_bitournament(4, 12, seed).unwrap();
        let p = optimal_partition(&d, PartitionMode::Exact).unwrap();
        let Ok(ex) = exceptional_set(&d, &p, 0.5) else { continue };
        let ctx = FeasibilityContext::new(d.clone(), p, ex, 0.25).unwrap();
        for e in d.arcs() {
            check_placeholder_forward(e, &ctx).unwrap();
        }
    }
}

// ---- move degree ----

fn oracle_move_valid(m1: &[NodeEdge], m2: &[NodeEdge], k1: &[NodeEdge], k2: &[NodeEdge]) -> bool {
    if k1.len() != k2.len() {
        return false;
    }
    let second = |k: &[NodeEdge]| k.iter().all(|&(a, b)| matches!(a, Node::W2(_)) || matches!(b, Node::W2(_)));
    if !second(k1) && !second(k2) {
        return false;
    }
    for (m, k) in [(m1, k1), (m2, k2)] {
        if !k.iter().all(|e| m.contains(e)) {
            return false;
        }
        let rest: Vec<NodeEdge> = m.iter().copied().filter(|e| !k.contains(e)).collect();
        for part in [k, &rest[..]] {
            let mut seen = BTreeSet::new();
            for n in part.iter().flat_map(|&(a, b)| [a, b]) {
                let w = match n {
                    Node::V(_) => continue,
                    Node::W1(w) | Node::W2(w) => w,
                };
                if !seen.insert(w) {
                    return false;
                }
            }
        }
    }
    true
}

fn subsets(m: &[NodeEdge]) -> Vec<Vec<NodeEdge>> {
    (0..1u32 << m.len()).map(|mask| (0..m.len()).filter(|i| mask >> i & 1 == 1).map(|i| m[i]).collect()).collect()
}

fn brute_force_exists(m1: &[NodeEdge], m2: &[NodeEdge]) -> bool {
    let s2 = subsets(m2);
    subsets(m1).iter().any(|k1| s2.iter().any(|k2| oracle_move_valid(m1, m2, k1, k2)))
}

fn random_matching(rng: &mut ChaCha8Rng, pool: &[Node], m: usize) -> Option<Vec<NodeEdge>> {
    for _ in 0..50 {
        let mut p = pool.to_vec();
        p.shuffle(rng);
        let mut out = Vec::new();
        for pair in p.chunks(2) {
            if pair.len() < 2 || out.len() == m {
                break;
            }
            let (a, b) = (pair[0], pair[1]);
            let bad = matches!((a, b), (Node::W2(_), Node::W1(_) | Node::W2(_)) | (Node::W1(_), Node::W2(_)));
            if !bad {
                out.push(if a < b { (a, b) } else { (b, a) });
            }
        }
        if out.len() == m {
            return Some(out);
        }
    }
    None
}

fn random_move_instance(rng: &mut ChaCha8Rng) -> (Vec<NodeEdge>, Vec<NodeEdge>) {
    loop {
        let w = rng.gen_range(0..5);
        let p = rng.gen_range(1..7);
        let mut pool: Vec<Node> = (0..w).flat_map(|x| [Node::W1(x), Node::W2(x)]).collect();
        pool.extend((w..w + p).map(Node::V));
        let m = rng.gen_range(0..=pool.len() / 2).min(5);
        if let (Some(a), Some(b)) = (random_matching(rng, &pool, m), random_matching(rng, &pool, m)) {
            return (a, b);
        }
    }
}

#[test]
fn move_degree_base_cases() {
    assert_eq!(move_degree2(&[], &[]).unwrap(), (vec![], vec![]));
    let m1 = vec![(Node::V(0), Node::W1(5))];
    let m2 = vec![(Node::V(1), Node::W2(5))];
    let (k1, k2) = move_degree2(&m1, &m2).unwrap();
    assert!(oracle_move_valid(&m1, &m2, &k1, &k2));
}

#[test]
fn move_degree_first_case_gadget() {
    // both matchings pair the first copies of two doubly covered vertices
    let m1 = vec![(Node::W1(0), Node::W1(1)), (Node::V(10), Node::W2(0)), (Node::V(11), Node::W2(1))];
    let m2 = vec![(Node::W1(2), Node::W1(3)), (Node::V(12), Node::W2(2)), (Node::V(13), Node::W2(3))];
    assert!(brute_force_exists(&m1, &m2));
    let (k1, k2) = move_degree2(&m1, &m2).unwrap();
    assert!(oracle_move_valid(&m1, &m2, &k1, &k2));
    assert_eq!(k1.len(), 2);
}

#[test]
fn move_degree_rejects_bad_input() {
    let m1 = vec![(Node::W1(0), Node::W2(1))];
    let m2 = vec![(Node::V(2), Node::V(3))];
    assert!(matches!(move_degree2(&m1, &m2), Err(Error::InvalidArgument(_))));
    assert!(move_degree2(&m2, &[]).is_err());
}

#[test]
fn move_degree_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..400 {
        let (m1, m2) = random_move_instance(&mut rng);
        assert!(brute_force_exists(&m1, &m2), "no valid pair for {m1:?} {m2:?}");
        let (k1, k2) = move_degree2(&m1, &m2).unwrap();
        assert!(oracle_move_valid(&m1, &m2, &k1, &k2), "{m1:?} {m2:?} -> {k1:?} {k2:?}");
    }
}

// ---- extending linear forests ----

fn oracle_extend_ok(req: &ExtendRequest, q: &[Vec<Arc>]) -> bool {
    let host: BTreeSet<Arc> = req.host.iter().copied().collect();
    let mut all = BTreeSet::new();
    let mut load: BTreeMap<Vertex, usize> = BTreeMap::new();
    for (i, qi) in q.iter().enumerate() {
        let outs: Vec<Vertex> = qi.iter().filter(|a| req.a.contains(&a.0)).map(|a| a.0).collect();
        let ins: Vec<Vertex> = qi.iter().filter(|a| req.a.contains(&a.1)).map(|a| a.1).collect();
        let outs_set: BTreeSet<Vertex> = outs.iter().copied().collect();
        let ins_set: BTreeSet<Vertex> = ins.iter().copied().collect();
        if outs.len() != outs_set.len() || ins.len() != ins_set.len() || outs_set != req.s_plus[i] || ins_set != req.s_minus[i] {
            return false;
        }
        let mut b_here = BTreeSet::new();
        for &(u, v) in qi {
            let w = if req.b.contains(&u) { u } else { v };
            if !host.contains(&(u, v)) || !all.insert((u, v)) || req.avoid[i].contains(&w) || !b_here.insert(w) {
                return false;
            }
        }
        for w in b_here {
            *load.entry(w).or_default() += 1;
        }
    }
    load.values().all(|&k| k as f64 <= req.cap)
}

fn random_request(rng: &mut ChaCha8Rng) -> ExtendRequest {
    let na = rng.gen_range(1..4);
    let nb = rng.gen_range(36..48);
    let a: BTreeSet<Vertex> = (0..na).collect();
    let b: BTreeSet<Vertex> = (na..na + nb).collect();
    let mut host = Vec::new();
    for &x in &a {
        for &y in &b {
            if rng.gen_bool(0.95) {
                host.push((x, y));
            }
            if rng.gen_bool(0.95) {
                host.push((y, x));
            }
        }
    }
    let l = rng.gen_range(1..5);
    let pick = |rng: &mut ChaCha8Rng, from: &BTreeSet<Vertex>, p: f64| -> BTreeSet<Vertex> {
        from.iter().copied().filter(|_| rng.gen_bool(p)).collect()
    };
    let s_plus = (0..l).map(|_| pick(rng, &a, 0.5)).collect();
    let s_minus = (0..l).map(|_| pick(rng, &a, 0.5)).collect();
    let avoid = (0..l).map(|_| pick(rng, &b, 0.05)).collect();
    let cap = 2.0 * na as f64;
    ExtendRequest::unchecked(a, b, host, s_plus, s_minus, avoid, cap).unwrap()
}

#[test]
fn extend_with_no_demands_is_empty() {
    let a: BTreeSet<Vertex> = [0].into();
    let b: BTreeSet<Vertex> = [1, 2].into();
    let req = ExtendRequest::new(a, b, vec![(0, 1)], vec![BTreeSet::new(); 2], vec![BTreeSet::new(); 2], vec![BTreeSet::new(); 2], 2.0)
        .unwrap();
    assert_eq!(extend_linear_forests(&req, &[]).unwrap(), vec![Vec::<Arc>::new(); 2]);
}

#[test]
fn extend_single_out_demand() {
    // with N = 2|A| = 2 the requirement is max(1, 2(|S| + |T|), 2(1 + N)) = 6
    let a: BTreeSet<Vertex> = [0].into();
    let b: BTreeSet<Vertex> = (1..8).collect();
    let mut host: Vec<Arc> = (2..8).map(|w| (0, w)).collect();
    host.push((1, 0));
    let avoid: BTreeSet<Vertex> = [2].into();
    let req = ExtendRequest::new(a, b, host, vec![[0].into()], vec![BTreeSet::new()], vec![avoid], 2.0).unwrap();
    let q = extend_linear_forests(&req, &[]).unwrap();
    assert_eq!(q.len(), 1);
    assert_eq!(q[0].len(), 1);
    let (x, y) = q[0][0];
    assert!(x == 0 && y != 2 && y != 1);
}

#[test]
fn extend_reports_degree_shortfall() {
    let a: BTreeSet<Vertex> = [0].into();
    let b: BTreeSet<Vertex> = [1].into();
    let r = ExtendRequest::new(a, b, vec![(0, 1)], vec![[0].into()], vec![BTreeSet::new()], vec![BTreeSet::new()], 1.0);
    assert!(matches!(r, Err(Error::InvalidArgument(m)) if m.contains("below")));
}

#[test]
fn extend_conclusions_recounted() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ran = 0;
    for _ in 0..300 {
        let req = random_request(&mut rng);
        if req.degree_shortfall().is_some() {
            continue;
        }
        let q = extend_linear_forests(&req, &[]).unwrap();
        assert!(oracle_extend_ok(&req, &q));
        ran += 1;
    }
    assert!(ran > 100, "only {ran} requests met the degree hypothesis");
}

// ---- backward decomposition ----

#[test]
fn backward_split_of_flipped_c4_is_the_pairing() {
    let n = 4;
    let d = one_flipped_c4(n).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let back: Vec<Arc> = d.arcs().into_iter().filter(|&e| ctx.is_backward(e)).collect();
    let out = decompose_backward_all(&back, &ctx, 1).unwrap();
    let got: BTreeSet<Vec<Arc>> = out.into_iter().collect();
    let want: BTreeSet<Vec<Arc>> = [vec![(n, 0), (3 * n, 2 * n)], vec![(0, 3 * n), (2 * n, n)]].into();
    assert_eq!(got, want);
}

#[test]
fn backward_split_of_nothing() {
    let d = make_blowup_cycle(4, 2).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    assert_eq!(decompose_backward_all(&[], &ctx, 2).unwrap(), vec![Vec::<Arc>::new(); 4]);
}

#[test]
fn backward_split_partitions_random_inputs() {
    for seed in 0..40 {
        let d = random_regular_bitournament(4, 10, seed).unwrap();
        let ctx = native_ctx(&d, &[], 0.25);
        let back: Vec<Arc> = d.arcs().into_iter().filter(|&e| ctx.is_backward(e)).collect();
        let counts = backward_pair_counts(&back, &ctx.partition);
        if counts[0] != counts[2] || counts[1] != counts[3] {
            continue;
        }
        let nv = d.n();
        let max_deg = (0..nv)
            .map(|v| back.iter().filter(|a| a.0 == v).count().max(back.iter().filter(|a| a.1 == v).count()))
            .max()
            .unwrap();
        let r = max_deg.div_ceil(2).max(1) + 1;
        let Ok(out) = decompose_backward_all(&back, &ctx, r) else { continue };
        assert_eq!(out.len(), 2 * r);
        let mut all: Vec<Arc> = out.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut want = back.clone();
        want.sort_unstable();
        assert_eq!(all, want);
        for s in &out {
            assert!(oracle_pseudo(&d, &BTreeSet::new(), 0.25, s));
        }
    }
}

// ---- pipeline ----

#[test]
fn pipeline_on_blowup_gives_empty_systems() {
    let n = 4;
    let d = make_blowup_cycle(4, n).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let out = decompose_backward_and_exceptional(&ctx, &[], 0.1).unwrap();
    assert_eq!(out, vec![Vec::<Arc>::new(); n]);
}

#[test]
fn pipeline_on_flipped_c4() {
    let n = 4;
    let d = one_flipped_c4(n).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let out = decompose_backward_and_exceptional(&ctx, &[], 0.1).unwrap();
    assert_eq!(out.len(), n);
    let nonempty: Vec<&Vec<Arc>> = out.iter().filter(|s| !s.is_empty()).collect();
    assert_eq!(nonempty.len(), 2);
    for s in nonempty {
        assert!(oracle_feasible(&d, &BTreeSet::new(), s));
        let back: Vec<Arc> = s.iter().copied().filter(|&e| class_step(&d, e.0, e.1) == -1).collect();
        assert_eq!(back.len(), 2);
        assert!(s.iter().all(|&(u, v)| {
            let starts = !s.iter().any(|a| a.1 == u);
            let ends = !s.iter().any(|a| a.0 == v);
            (!starts || d.class_of(u) == 0) && (!ends || d.class_of(v) == 3)
        }));
    }
}

#[test]
fn endpoints_fixed_point() {
    // a path already running U1 -> U4 is left alone by both extension stages
    let d = make_blowup_cycle(4, 4).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let sys = vec![vec![(0, 4), (4, 8), (8, 12)], vec![]];
    let host = d.arcs();
    assert_eq!(extend_endpoints(&sys, &ctx, &host, 0.3).unwrap(), sys);
    assert_eq!(extend_startpoints(&sys, &ctx, &host, 0.3).unwrap(), sys);
    let out = pseudo_to_feasible(&sys, &ctx, &host, &[], 0.3).unwrap();
    // forward arcs off U* are dropped before the stages run
    assert_eq!(out, vec![vec![], vec![]]);
}

#[test]
fn endpoints_extend_a_backward_pair() {
    let n = 4;
    let d = one_flipped_c4(n).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let host = d.arcs();
    let sys = vec![vec![(n, 0), (3 * n, 2 * n)]];
    let ends = extend_endpoints(&sys, &ctx, &host, 0.3).unwrap();
    assert!(ends_of(&ends[0]).iter().all(|&v| ctx.index(v) == 3));
    assert_eq!(starts_of(&ends[0]), starts_of(&sys[0]));
    let both = extend_startpoints(&ends, &ctx, &host, 0.3).unwrap();
    assert!(starts_of(&both[0]).iter().all(|&v| ctx.index(v) == 0));
    assert!(oracle_feasible(&d, &BTreeSet::new(), &both[0]));
    assert!(both[0].len() <= 7 * sys[0].len());
}

#[test]
fn prescribed_arcs_are_incorporated() {
    let n = 4;
    let d = one_flipped_c4(n).unwrap();
    let ctx = native_ctx(&d, &[], 0.25);
    let sys: Vec<Vec<Arc>> = vec![vec![(n, 0), (3 * n, 2 * n)], vec![], vec![], vec![]];
    let e = vec![(1, n + 1), (n + 2, 2 * n + 2)];
    let out = incorporate_prescribed(&sys, &ctx, &e).unwrap();
    let all: BTreeSet<Arc> = out.iter().flatten().copied().collect();
    assert!(e.iter().all(|a| all.contains(a)));
    for (s, old) in out.iter().zip(&sys) {
        assert!(s.len() <= old.len() + 5);
        assert!(oracle_feasible(&d, &BTreeSet::new(), s));
    }
    assert!(incorporate_prescribed(&sys, &ctx, &[(n, 0)]).is_err());
}

/// Random pseudo-feasible pairs of systems, grown by single forward arcs at
/// U* and by balanced pairs of backward arcs.
fn grow_systems(rng: &mut ChaCha8Rng, ctx: &FeasibilityContext, k: usize) -> Vec<Vec<Arc>> {
    let arcs = ctx.tournament.arcs();
    let fwd: Vec<Arc> = arcs
        .iter()
        .copied()
        .filter(|&e| ctx.is_forward(e) && (ctx.in_ustar(e.0) || ctx.in_ustar(e.1)) && !is_placeholder(e, ctx))
        .collect();
    let back: Vec<Arc> = arcs.iter().copied().filter(|&e| ctx.is_backward(e)).collect();
    let mut systems = vec![Vec::new(); k];
    let mut used = BTreeSet::new();
    for _ in 0..400 {
        let j = rng.gen_range(0..k);
        let add: Vec<Arc> = if !fwd.is_empty() && rng.gen_bool(0.3) {
            vec![*fwd.choose(rng).unwrap()]
        } else {
            let e = *back.choose(rng).unwrap();
            let c = ctx.index(e.0);
            let partners: Vec<Arc> = back.iter().copied().filter(|&f| ctx.index(f.0) == (c + 2) % 4).collect();
            let Some(&f) = partners.choose(rng) else { continue };
            vec![e, f]
        };
        if add.iter().any(|a| used.contains(a)) || add.len() == 2 && add[0] == add[1] {
            continue;
        }
        let mut trial = systems[j].clone();
        trial.extend(add.iter().copied());
        trial.sort_unstable();
        if is_pseudo_feasible(&trial, ctx) {
            used.extend(add);
            systems[j] = trial;
        }
    }
    systems
}

fn check_redistribution(d: &Digraph, star: &BTreeSet<Vertex>, before: &[Vec<Arc>], after: &[Vec<Arc>]) {
    let a: BTreeSet<Arc> = before.iter().flatten().copied().collect();
    let b: BTreeSet<Arc> = after.iter().flatten().copied().collect();
    assert_eq!(a, b);
    for (s, old) in after.iter().zip(before) {
        assert_eq!(s.len(), old.len());
        assert!(all_cycles(s).is_empty());
        assert!(s.iter().all(|&(u, _)| s.iter().filter(|e| e.0 == u).count() == 1));
        assert!(s.iter().all(|&(_, v)| s.iter().filter(|e| e.1 == v).count() == 1));
        assert!(oracle_pseudo(d, star, 0.25, s));
    }
}

/// A balanced partner system holding a second placeholder at the U* end of
/// `e`, in the same direction, so the two can trade.
fn trading_partner(ctx: &FeasibilityContext, sys: &[Arc], e: Arc) -> Option<Vec<Arc>> {
    let t = &ctx.tournament;
    let out = ctx.in_ustar(e.0);
    let u = if out { e.0 } else { e.1 };
    let other = if out { e.1 } else { e.0 };
    let swaps: Vec<Arc> = if out {
        t.out_nbrs(u).ones().map(|w| (u, w)).collect()
    } else {
        t.in_nbrs(u).ones().map(|w| (w, u)).collect()
    };
    let spans = touched(sys);
    for e2 in swaps {
        let w = if out { e2.1 } else { e2.0 };
        if w == other || !ctx.is_backward(e2) || !is_placeholder(e2, ctx) || spans.contains(&w) {
            continue;
        }
        for f in t.arcs() {
            if !ctx.is_backward(f) || is_placeholder(f, ctx) || ctx.index(f.0) != (ctx.index(e2.0) + 2) % 4 || sys.contains(&f) {
                continue;
            }
            if [f.0, f.1].contains(&other) {
                continue;
            }
            let mut partner = vec![e2, f];
            partner.sort_unstable();
            if is_pseudo_feasible(&partner, ctx) {
                return Some(partner);
            }
        }
    }
    None
}

#[test]
fn redistribution_breaks_placeholder_cycles() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut cyclic, mut repaired) = (0, 0);
    for seed in 0..80 {
        let d = random_regular_bitournament(3, 10, seed).unwrap();
        let star_v: Vec<Vertex> = (0..4).map(|i| 3 * i + rng.gen_range(0..3)).collect();
        let star: BTreeSet<Vertex> = star_v.iter().copied().collect();
        let ctx = native_ctx(&d, &star_v, 0.25);
        if !ctx.high().is_empty() {
            continue;
        }
        let systems = grow_systems(&mut rng, &ctx, 3);
        match redistribute_placeholders(&systems, &ctx) {
            Ok(out) => check_redistribution(&d, &star, &systems, &out),
            Err(Error::Stage { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
        for s in &systems {
            let Some(c) = all_cycles(s).into_iter().next() else { continue };
            cyclic += 1;
            let k = c.len();
            let e = (0..k).map(|i| (c[i], c[(i + 1) % k])).find(|&a| oracle_placeholder(&d, &star, 0.25, a)).unwrap();
            let Some(partner) = trading_partner(&ctx, s, e) else { continue };
            let pair = vec![s.clone(), partner];
            // other placeholders of the cyclic system may still have nowhere to go
            if let Ok(out) = redistribute_placeholders(&pair, &ctx) {
                check_redistribution(&d, &star, &pair, &out);
                repaired += 1;
            }
        }
    }
    assert!(cyclic > 0, "no cyclic system was generated");
    assert!(repaired > 0, "no cyclic system found a trading partner ({cyclic} cyclic)");
}

#[test]
fn pipeline_outputs_recounted_on_random_instances() {
    let mut ok = 0;
    for seed in 0..30 {
        let n = 4 + (seed as usize % 3);
        let d = random_regular_bitournament(n, 2, seed).unwrap();
        let p = optimal_partition(&d, PartitionMode::Exact).unwrap();
        let Ok(ex) = exceptional_set(&d, &p, 0.2) else { continue };
        let star: BTreeSet<Vertex> = ex.members().ones().collect();
        let ctx = FeasibilityContext::new(d.clone(), p, ex, 0.25).unwrap();
        let Ok(out) = decompose_backward_and_exceptional(&ctx, &[], 0.1) else { continue };
        ok += 1;
        assert_eq!(out.len(), n);
        let all: BTreeSet<Arc> = out.iter().flatten().copied().collect();
        assert_eq!(all.len(), out.iter().map(Vec::len).sum::<usize>(), "systems share an arc");
        for e in d.arcs() {
            if ctx.is_backward(e) {
                assert!(all.contains(&e));
            }
        }
        for s in &out {
            assert!(oracle_feasible(&d, &star, s));
        }
    }
    assert!(ok > 0);
}
