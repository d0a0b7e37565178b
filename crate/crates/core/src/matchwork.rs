//! Bipartite matchings, König edge colourings, greedy list colouring, and
//! matching contraction.
//!
//! Matching routines work on [`BipGraph`], with left and right vertices
//! numbered from 0 independently. Contraction works on global vertex ids.

use std::collections::{BTreeSet, VecDeque};

use crate::digraph::{Arc, Vertex};
use crate::error::{Error, Result};
use crate::forest::LinearForest;

/// Bipartite (multi)graph given by its edge list.
#[derive(Clone, Debug, Default)]
pub struct BipGraph {
    pub n_left: usize,
    pub n_right: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipGraph {
    pub fn new(n_left: usize, n_right: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(l, r)) = edges.iter().find(|&&(l, r)| l >= n_left || r >= n_right) {
            return Err(Error::invalid(format!("edge ({l},{r}) out of range")));
        }
        Ok(BipGraph { n_left, n_right, edges })
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_left];
        for &(l, _) in &self.edges {
            d[l] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_right];
        for &(_, r) in &self.edges {
            d[r] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        let l = self.left_degrees().into_iter().max().unwrap_or(0);
        let r = self.right_degrees().into_iter().max().unwrap_or(0);
        l.max(r)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_left];
        for &(l, r) in &self.edges {
            adj[l].push(r);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Maximum matching by Hopcroft–Karp, as sorted `(left, right)` pairs.
pub fn max_matching(g: &BipGraph) -> Vec<(usize, usize)> {
    let adj = g.adjacency();
    let mut ml: Vec<Option<usize>> = vec![None; g.n_left];
    let mut mr: Vec<Option<usize>> = vec![None; g.n_right];
    loop {
        let mut dist = vec![usize::MAX; g.n_left];
        let mut queue = VecDeque::new();
        for l in 0..g.n_left {
            if ml[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                match mr[r] {
                    None => found = true,
                    Some(l2) if dist[l2] == usize::MAX => {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for l in 0..g.n_left {
            if ml[l].is_none() {
                augment(l, &adj, &mut dist, &mut ml, &mut mr);
            }
        }
    }
    (0..g.n_left).filter_map(|l| ml[l].map(|r| (l, r))).collect()
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    dist: &mut [usize],
    ml: &mut [Option<usize>],
    mr: &mut [Option<usize>],
) -> bool {
    for &r in &adj[l] {
        let ok = match mr[r] {
            None => true,
            Some(l2) => dist[l2] == dist[l] + 1 && augment(l2, adj, dist, ml, mr),
        };
        if ok {
            ml[l] = Some(r);
            mr[r] = Some(l);
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}

/// Matching covering the left side under the degree condition
/// `d(a) ≥ |B|/2`, `d(b) ≥ |A| − |B|/2`.
pub fn hall_cover(g: &BipGraph) -> Result<Vec<(usize, usize)>> {
    let (a, b) = (g.n_left, g.n_right);
    if a > b {
        return Err(Error::invalid(format!("|A| = {a} exceeds |B| = {b}")));
    }
    if let Some((l, d)) = g.left_degrees().into_iter().enumerate().find(|&(_, d)| 2 * d < b) {
        return Err(Error::invalid(format!("left vertex {l} has degree {d} < |B|/2")));
    }
    if let Some((r, d)) = g.right_degrees().into_iter().enumerate().find(|&(_, d)| 2 * d + b < 2 * a) {
        return Err(Error::invalid(format!("right vertex {r} has degree {d} < |A| - |B|/2")));
    }
    let m = max_matching(g);
    if m.len() != a {
        return Err(Error::invariant("hall", format!("matching covers {} of {a}", m.len())));
    }
    Ok(m)
}

/// Splits the edges into `delta` matchings whose sizes differ by at most one.
/// Returns edge indices per matching.
pub fn konig_equal_split(g: &BipGraph, delta: usize) -> Result<Vec<Vec<usize>>> {
    let dmax = g.max_degree();
    if dmax > delta {
        return Err(Error::invalid(format!("max degree {dmax} exceeds {delta}")));
    }
    if delta == 0 {
        return Ok(Vec::new());
    }
    let mut colour = vec![0usize; g.edges.len()];
    if delta.is_power_of_two() {
        let all: Vec<usize> = (0..g.edges.len()).collect();
        euler_colour(g, &all, 0, delta, &mut colour);
    } else {
        kempe_colour(g, delta, &mut colour);
    }
    equalize(g, delta, &mut colour);
    let mut classes = vec![Vec::new(); delta];
    for (e, &c) in colour.iter().enumerate() {
        classes[c].push(e);
    }
    Ok(classes)
}

// Degree halving along trails, recursively: colours base..base+width.
fn euler_colour(g: &BipGraph, edges: &[usize], base: usize, width: usize, colour: &mut [usize]) {
    if width == 1 {
        for &e in edges {
            colour[e] = base;
        }
        return;
    }
    let nv = g.n_left + g.n_right;
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for &e in edges {
        let (l, r) = g.edges[e];
        inc[l].push(e);
        inc[g.n_left + r].push(e);
    }
    let mut used = vec![false; g.edges.len()];
    let mut rest: Vec<usize> = inc.iter().map(Vec::len).collect();
    let mut ptr = vec![0usize; nv];
    let (mut half0, mut half1) = (Vec::new(), Vec::new());
    let other = |e: usize, v: usize| {
        let (l, r) = g.edges[e];
        if v == l {
            g.n_left + r
        } else {
            l
        }
    };
    for pass in 0..2 {
        for s in 0..nv {
            while rest[s] > 0 && (pass == 1 || rest[s] % 2 == 1) {
                let mut v = s;
                let mut parity = 0;
                loop {
                    while ptr[v] < inc[v].len() && used[inc[v][ptr[v]]] {
                        ptr[v] += 1;
                    }
                    if ptr[v] == inc[v].len() {
                        break;
                    }
                    let e = inc[v][ptr[v]];
                    used[e] = true;
                    let w = other(e, v);
                    rest[v] -= 1;
                    rest[w] -= 1;
                    if parity == 0 {
                        half0.push(e);
                    } else {
                        half1.push(e);
                    }
                    parity ^= 1;
                    v = w;
                }
            }
        }
    }
    euler_colour(g, &half0, base, width / 2, colour);
    euler_colour(g, &half1, base + width / 2, width / 2, colour);
}

// Proper colouring by alternating-path recolouring.
fn kempe_colour(g: &BipGraph, delta: usize, colour: &mut [usize]) {
    let nv = g.n_left + g.n_right;
    let mut at: Vec<Vec<Option<usize>>> = vec![vec![None; delta]; nv];
    let ends = |e: usize| (g.edges[e].0, g.n_left + g.edges[e].1);
    for e in 0..g.edges.len() {
        let (u, v) = ends(e);
        let a = (0..delta).find(|&c| at[u][c].is_none()).expect("free colour at u");
        if at[v][a].is_some() {
            let b = (0..delta).find(|&c| at[v][c].is_none()).expect("free colour at v");
            // a-b path from v; in a bipartite graph it cannot reach u.
            let mut path = Vec::new();
            let (mut x, mut c) = (v, a);
            while let Some(f) = at[x][c] {
                path.push(f);
                let (p, q) = ends(f);
                x = if p == x { q } else { p };
                c = if c == a { b } else { a };
            }
            for &f in &path {
                let (p, q) = ends(f);
                at[p][colour[f]] = None;
                at[q][colour[f]] = None;
            }
            for &f in &path {
                let nc = if colour[f] == a { b } else { a };
                colour[f] = nc;
                let (p, q) = ends(f);
                at[p][nc] = Some(f);
                at[q][nc] = Some(f);
            }
        }
        colour[e] = a;
        at[u][a] = Some(e);
        at[v][a] = Some(e);
    }
}

// Moves edges from the largest to the smallest class along an alternating
// path that has one more edge of the larger colour.
fn equalize(g: &BipGraph, delta: usize, colour: &mut [usize]) {
    let nv = g.n_left + g.n_right;
    let ends = |e: usize| (g.edges[e].0, g.n_left + g.edges[e].1);
    loop {
        let mut size = vec![0usize; delta];
        for &c in colour.iter() {
            size[c] += 1;
        }
        let big = (0..delta).max_by_key(|&c| (size[c], std::cmp::Reverse(c))).unwrap();
        let small = (0..delta).min_by_key(|&c| (size[c], c)).unwrap();
        if size[big] <= size[small] + 1 {
            return;
        }
        let mut at: Vec<[Option<usize>; 2]> = vec![[None, None]; nv];
        for (e, &c) in colour.iter().enumerate() {
            let slot = if c == big { 0 } else if c == small { 1 } else { continue };
            let (p, q) = ends(e);
            at[p][slot] = Some(e);
            at[q][slot] = Some(e);
        }
        let mut moved = false;
        for s in 0..nv {
            if at[s][0].is_none() || at[s][1].is_some() {
                continue;
            }
            let mut path = Vec::new();
            let (mut x, mut slot) = (s, 0);
            while let Some(f) = at[x][slot] {
                path.push(f);
                let (p, q) = ends(f);
                x = if p == x { q } else { p };
                slot ^= 1;
            }
            if path.len() % 2 == 1 {
                for &f in &path {
                    colour[f] = if colour[f] == big { small } else { big };
                }
                moved = true;
                break;
            }
        }
        assert!(moved, "an alternating path with surplus colour always exists");
    }
}

/// A matching with at least `e(G)/Δ(G)` edges: the largest class of an equal split.
pub fn konig_large(g: &BipGraph) -> Vec<usize> {
    let delta = g.max_degree();
    if delta == 0 {
        return Vec::new();
    }
    let classes = konig_equal_split(g, delta).expect("delta is the max degree");
    classes.into_iter().max_by_key(|c| c.len()).unwrap_or_default()
}

/// Greedy proper list edge colouring, edges taken in ascending `(u, v)` order.
/// Needs `|L(e)| ≥ d(u) + d(v) + 1` with `d` the total degree in the arc set.
pub fn greedy_list_color(arcs: &[Arc], lists: &[Vec<usize>]) -> Result<Vec<usize>> {
    if arcs.len() != lists.len() {
        return Err(Error::invalid("one list per arc required"));
    }
    let nv = arcs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let mut deg = vec![0usize; nv];
    for &(u, v) in arcs {
        deg[u] += 1;
        deg[v] += 1;
    }
    for (i, &(u, v)) in arcs.iter().enumerate() {
        let distinct: BTreeSet<usize> = lists[i].iter().copied().collect();
        if distinct.len() < deg[u] + deg[v] + 1 {
            return Err(Error::invalid(format!(
                "list of ({u},{v}) has {} colours, needs {}",
                distinct.len(),
                deg[u] + deg[v] + 1
            )));
        }
    }
    greedy_list_assign(arcs, lists)
}

/// The greedy pass of [`greedy_list_color`] without the list-size check; fails
/// only if some arc really runs out of colours.
pub fn greedy_list_assign(arcs: &[Arc], lists: &[Vec<usize>]) -> Result<Vec<usize>> {
    if arcs.len() != lists.len() {
        return Err(Error::invalid("one list per arc required"));
    }
    let nv = arcs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by_key(|&i| arcs[i]);
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nv];
    let mut out = vec![0usize; arcs.len()];
    for i in order {
        let (u, v) = arcs[i];
        let mut options: Vec<usize> = lists[i].clone();
        options.sort_unstable();
        let c = options
            .into_iter()
            .find(|c| !used[u].contains(c) && !used[v].contains(c))
            .ok_or_else(|| Error::invariant("list colouring", format!("no colour left for ({u},{v})")))?;
        out[i] = c;
        used[u].insert(c);
        used[v].insert(c);
    }
    Ok(out)
}

/// A perfect matching from B to A, stored as partner tables over global ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionMap {
    a: Vec<Vertex>,
    b: Vec<Vertex>,
    b_to_a: Vec<Option<Vertex>>,
    a_to_b: Vec<Option<Vertex>>,
}

impl ContractionMap {
    /// `matching` lists arcs `(b, a)`; it must be perfect between `a` and `b`.
    pub fn new(n_vertices: usize, a: &[Vertex], b: &[Vertex], matching: &[Arc]) -> Result<Self> {
        let mut in_a = vec![false; n_vertices];
        let mut in_b = vec![false; n_vertices];
        for &x in a {
            in_a[x] = true;
        }
        for &x in b {
            if in_a[x] {
                return Err(Error::invalid(format!("{x} lies in both classes")));
            }
            in_b[x] = true;
        }
        let mut b_to_a = vec![None; n_vertices];
        let mut a_to_b = vec![None; n_vertices];
        for &(y, x) in matching {
            if !in_b[y] || !in_a[x] {
                return Err(Error::invalid(format!("({y},{x}) is not a B→A arc")));
            }
            if b_to_a[y].is_some() || a_to_b[x].is_some() {
                return Err(Error::invalid(format!("({y},{x}) shares an endpoint")));
            }
            b_to_a[y] = Some(x);
            a_to_b[x] = Some(y);
        }
        if a.len() != b.len() || matching.len() != a.len() {
            return Err(Error::invalid("matching is not perfect"));
        }
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        Ok(ContractionMap { a, b, b_to_a, a_to_b })
    }

    pub fn a(&self) -> &[Vertex] {
        &self.a
    }

    pub fn b(&self) -> &[Vertex] {
        &self.b
    }

    /// The A-vertex matched from `b`.
    pub fn partner_of_b(&self, b: Vertex) -> Option<Vertex> {
        self.b_to_a.get(b).copied().flatten()
    }

    /// The B-vertex matched into `a`.
    pub fn partner_of_a(&self, a: Vertex) -> Option<Vertex> {
        self.a_to_b.get(a).copied().flatten()
    }

    pub fn arcs(&self) -> Vec<Arc> {
        self.a.iter().map(|&x| (self.a_to_b[x].unwrap(), x)).collect()
    }

    fn normalize(&self, e: Arc) -> Result<(Vertex, Vertex)> {
        let (u, v) = e;
        if self.partner_of_a(u).is_some() && self.partner_of_b(v).is_some() {
            Ok((u, v))
        } else if self.partner_of_b(u).is_some() && self.partner_of_a(v).is_some() {
            Ok((v, u))
        } else {
            Err(Error::invalid(format!("({u},{v}) does not join A and B")))
        }
    }
}

/// The digraph on A with `a′ → a` whenever `a′b ∈ G` and `b` is matched into
/// `a`. Edges of `g` are read as unordered pairs.
pub fn contract(g: &[Arc], m: &ContractionMap) -> Result<Vec<Arc>> {
    let mut out = BTreeSet::new();
    for &e in g {
        let (x, y) = m.normalize(e)?;
        let a = m.partner_of_b(y).unwrap();
        if a != x {
            out.insert((x, a));
        }
    }
    Ok(out.into_iter().collect())
}

/// Inverse of [`contract`]: `a′ → a` becomes the edge `(a′, b)` with `b` matched into `a`.
pub fn expand(d: &[Arc], m: &ContractionMap) -> Result<Vec<Arc>> {
    let mut out = BTreeSet::new();
    for &(x, y) in d {
        match (m.partner_of_a(x), m.partner_of_a(y)) {
            (Some(_), Some(b)) => {
                out.insert((x, b));
            }
            _ => return Err(Error::invalid(format!("({x},{y}) is not an arc on A"))),
        }
    }
    Ok(out.into_iter().collect())
}

/// Turns a Hamilton cycle `c` on A (vertex order) into one on A ∪ B using the matching.
pub fn close_hamilton(c: &[Vertex], m: &ContractionMap) -> Result<Vec<Vertex>> {
    let set: BTreeSet<Vertex> = c.iter().copied().collect();
    if set.len() != c.len() || c.len() != m.a.len() || c.iter().any(|&x| m.partner_of_a(x).is_none()) {
        return Err(Error::invalid("not a Hamilton cycle on A"));
    }
    let k = c.len();
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        out.push(c[i]);
        out.push(m.partner_of_a(c[(i + 1) % k]).unwrap());
    }
    Ok(out)
}

/// Contracts a bipartite linear forest whose B→A arcs form a perfect matching.
pub fn contract_linear_forest(f: &LinearForest, a: &[Vertex], b: &[Vertex]) -> Result<LinearForest> {
    let a_set: BTreeSet<Vertex> = a.iter().copied().collect();
    let b_set: BTreeSet<Vertex> = b.iter().copied().collect();
    let mut m_arcs = Vec::new();
    let mut ab_arcs = Vec::new();
    for &(u, v) in f.arcs() {
        if b_set.contains(&u) && a_set.contains(&v) {
            m_arcs.push((u, v));
        } else if a_set.contains(&u) && b_set.contains(&v) {
            ab_arcs.push((u, v));
        } else {
            return Err(Error::invalid(format!("({u},{v}) does not join A and B")));
        }
    }
    let nv = a.iter().chain(b).copied().max().map_or(0, |x| x + 1);
    let m = ContractionMap::new(nv, a, b, &m_arcs)?;
    let d = LinearForest::new(a.iter().copied(), &contract(&ab_arcs, &m)?)?;
    let starts_f: BTreeSet<Vertex> = f.starts().into_iter().filter_map(|x| m.partner_of_b(x)).collect();
    let ends_f: BTreeSet<Vertex> = f.ends();
    let int_f: BTreeSet<Vertex> = f.internal().intersection(&a_set).copied().collect();
    if d.starts() != starts_f {
        return Err(Error::invariant("contract linear forest", "V+(D) != N_M(V+(F))"));
    }
    if d.ends() != ends_f {
        return Err(Error::invariant("contract linear forest", "V-(D) != V-(F)"));
    }
    if d.internal() != int_f.difference(&starts_f).copied().collect() {
        return Err(Error::invariant("contract linear forest", "V0(D) != (V0(F) ∩ A) \\ N_M(V+(F))"));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    // Largest matching by trying every edge subset.
    fn brute_max_matching(g: &BipGraph) -> usize {
        let m = g.edges.len();
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let chosen: Vec<_> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| g.edges[i]).collect();
            let ls: BTreeSet<_> = chosen.iter().map(|e| e.0).collect();
            let rs: BTreeSet<_> = chosen.iter().map(|e| e.1).collect();
            if ls.len() == chosen.len() && rs.len() == chosen.len() {
                best = best.max(chosen.len());
            }
        }
        best
    }

    fn lcg(seed: &mut u64) -> u64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *seed >> 33
    }

    #[test]
    fn matching_basics() {
        assert!(max_matching(&BipGraph::new(3, 3, vec![]).unwrap()).is_empty());
        let k = BipGraph::new(4, 4, (0..4).cartesian_product(0..4).collect()).unwrap();
        assert_eq!(max_matching(&k).len(), 4);
        assert_eq!(hall_cover(&k).unwrap().len(), 4);
        let star = BipGraph::new(1, 4, vec![(0, 1), (0, 3)]).unwrap();
        assert_eq!(hall_cover(&star).unwrap(), vec![(0, 1)]);
        let thin = BipGraph::new(1, 4, vec![(0, 1)]).unwrap();
        assert!(hall_cover(&thin).is_err());
    }

    #[test]
    fn matching_vs_brute_force() {
        let mut s = 7u64;
        for _ in 0..60 {
            let (nl, nr) = (1 + lcg(&mut s) as usize % 5, 1 + lcg(&mut s) as usize % 5);
            let edges: Vec<_> =
                (0..nl).cartesian_product(0..nr).filter(|_| lcg(&mut s) % 3 == 0).take(14).collect();
            let g = BipGraph::new(nl, nr, edges).unwrap();
            assert_eq!(max_matching(&g).len(), brute_max_matching(&g));
        }
    }

    #[test]
    fn hall_degree_instance() {
        // |A|=5, |B|=8, every a sees 4 consecutive b's, every b seen at least 2 times
        let edges: Vec<_> = (0..5).flat_map(|a| (0..4).map(move |k| (a, (2 * a + k) % 8))).collect();
        let g = BipGraph::new(5, 8, edges).unwrap();
        let m = hall_cover(&g).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(max_matching(&g).len(), 5);
    }

    fn check_split(g: &BipGraph, delta: usize, classes: &[Vec<usize>]) {
        assert_eq!(classes.len(), delta);
        let mut all: Vec<usize> = classes.concat();
        all.sort_unstable();
        assert_eq!(all, (0..g.edges.len()).collect::<Vec<_>>());
        for c in classes {
            let ls: BTreeSet<_> = c.iter().map(|&e| g.edges[e].0).collect();
            let rs: BTreeSet<_> = c.iter().map(|&e| g.edges[e].1).collect();
            assert_eq!(ls.len(), c.len());
            assert_eq!(rs.len(), c.len());
        }
        let lo = classes.iter().map(Vec::len).min().unwrap();
        let hi = classes.iter().map(Vec::len).max().unwrap();
        assert!(hi - lo <= 1);
    }

    #[test]
    fn equal_split() {
        let star = BipGraph::new(1, 3, vec![(0, 0), (0, 1), (0, 2)]).unwrap();
        let c = konig_equal_split(&star, 3).unwrap();
        check_split(&star, 3, &c);
        assert!(c.iter().all(|m| m.len() == 1));
        let cyc = BipGraph::new(3, 3, vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]).unwrap();
        let c = konig_equal_split(&cyc, 2).unwrap();
        check_split(&cyc, 2, &c);
        assert!(c.iter().all(|m| m.len() == 3));
        assert!(konig_equal_split(&star, 2).is_err());
        let mut s = 3u64;
        for round in 0..200 {
            let (nl, nr) = (2 + lcg(&mut s) as usize % 6, 2 + lcg(&mut s) as usize % 6);
            let mut edges = Vec::new();
            for _ in 0..(lcg(&mut s) % 20) {
                edges.push((lcg(&mut s) as usize % nl, lcg(&mut s) as usize % nr));
            }
            let g = BipGraph::new(nl, nr, edges).unwrap();
            let delta = g.max_degree() + (round % 3);
            if delta == 0 {
                continue;
            }
            check_split(&g, delta, &konig_equal_split(&g, delta).unwrap());
            let big = konig_large(&g);
            let dm = g.max_degree();
            assert!(big.len() * dm >= g.edges.len());
        }
    }

    #[test]
    fn list_colouring() {
        assert_eq!(greedy_list_color(&[(0, 1)], &[vec![1, 5, 7]]).unwrap(), vec![1]);
        assert!(greedy_list_color(&[(0, 1)], &[vec![1]]).is_err());
        let arcs = vec![(0, 1), (1, 2), (2, 0), (0, 3)];
        let lists: Vec<Vec<usize>> = vec![(0..6).collect(), (0..6).collect(), (0..6).collect(), (10..15).collect()];
        let c = greedy_list_color(&arcs, &lists).unwrap();
        for i in 0..arcs.len() {
            assert!(lists[i].contains(&c[i]));
            for j in 0..i {
                let (a, b) = (arcs[i], arcs[j]);
                if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
                    assert_ne!(c[i], c[j]);
                }
            }
        }
    }

    #[test]
    fn contraction_examples() {
        // a1=0, a2=1, b1=2, b2=3
        let m = ContractionMap::new(4, &[0, 1], &[2, 3], &[(2, 0), (3, 1)]).unwrap();
        let g = vec![(0, 2), (2, 1), (1, 3), (3, 0)];
        assert_eq!(contract(&g, &m).unwrap(), vec![(0, 1), (1, 0)]);
        assert!(contract(&[(0, 2), (1, 3)], &m).unwrap().is_empty());
        assert_eq!(expand(&[], &m).unwrap(), vec![]);
        assert_eq!(close_hamilton(&[0, 1], &m).unwrap(), vec![0, 3, 1, 2]);
        let one = ContractionMap::new(2, &[0], &[1], &[(1, 0)]).unwrap();
        assert_eq!(close_hamilton(&[0], &one).unwrap(), vec![0, 1]);
        assert!(close_hamilton(&[0, 0], &m).is_err());
        assert!(ContractionMap::new(4, &[0, 1], &[2, 3], &[(2, 0)]).is_err());
    }

    #[test]
    fn forest_contraction() {
        let f = LinearForest::from_arcs(&[(2, 0), (3, 1)]).unwrap();
        let d = contract_linear_forest(&f, &[0, 1], &[2, 3]).unwrap();
        assert!(d.arcs().is_empty());
        assert_eq!(d.starts(), [0, 1].into());
        assert_eq!(d.ends(), [0, 1].into());
        // path b1→a1→b2 completed by b2→a2
        let f = LinearForest::from_arcs(&[(2, 0), (0, 3), (3, 1)]).unwrap();
        let d = contract_linear_forest(&f, &[0, 1], &[2, 3]).unwrap();
        assert_eq!(d.arcs(), &[(0, 1)]);
    }
}
