//! Linear forests: vertex-disjoint directed paths.

use std::collections::{BTreeMap, BTreeSet};

use crate::digraph::{Arc, Vertex};
use crate::error::{Error, Result};

/// Arcs plus an explicit vertex set, so isolated vertices are carried along.
/// An isolated vertex is both a start and an end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForest {
    arcs: Vec<Arc>,
    vertices: BTreeSet<Vertex>,
}

impl LinearForest {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>, arcs: &[Arc]) -> Result<Self> {
        let mut vs: BTreeSet<Vertex> = vertices.into_iter().collect();
        for &(u, v) in arcs {
            vs.insert(u);
            vs.insert(v);
        }
        if let Some(why) = linear_forest_violation(arcs) {
            return Err(Error::invalid(why));
        }
        let mut arcs = arcs.to_vec();
        arcs.sort_unstable();
        Ok(LinearForest { arcs, vertices: vs })
    }

    pub fn from_arcs(arcs: &[Arc]) -> Result<Self> {
        LinearForest::new([], arcs)
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    fn degrees(&self) -> (BTreeMap<Vertex, usize>, BTreeMap<Vertex, usize>) {
        let mut out = BTreeMap::new();
        let mut inn = BTreeMap::new();
        for &(u, v) in &self.arcs {
            *out.entry(u).or_insert(0) += 1;
            *inn.entry(v).or_insert(0) += 1;
        }
        (out, inn)
    }

    /// V⁺: vertices with no incoming arc.
    pub fn starts(&self) -> BTreeSet<Vertex> {
        let (_, inn) = self.degrees();
        self.vertices.iter().copied().filter(|v| !inn.contains_key(v)).collect()
    }

    /// V⁻: vertices with no outgoing arc.
    pub fn ends(&self) -> BTreeSet<Vertex> {
        let (out, _) = self.degrees();
        self.vertices.iter().copied().filter(|v| !out.contains_key(v)).collect()
    }

    /// V⁰: vertices with one arc in and one arc out.
    pub fn internal(&self) -> BTreeSet<Vertex> {
        let (out, inn) = self.degrees();
        self.vertices.iter().copied().filter(|v| out.contains_key(v) && inn.contains_key(v)).collect()
    }

    /// The maximal paths, each as a vertex sequence, ordered by first vertex.
    pub fn paths(&self) -> Vec<Vec<Vertex>> {
        let next: BTreeMap<Vertex, Vertex> = self.arcs.iter().copied().collect();
        self.starts()
            .into_iter()
            .map(|s| {
                let mut p = vec![s];
                while let Some(&w) = next.get(p.last().unwrap()) {
                    p.push(w);
                }
                p
            })
            .collect()
    }
}

/// `None` if the arcs form a linear forest, else a reason.
pub fn linear_forest_violation(arcs: &[Arc]) -> Option<String> {
    let mut next = BTreeMap::new();
    let mut seen_in = BTreeSet::new();
    for &(u, v) in arcs {
        if u == v {
            return Some(format!("loop at {u}"));
        }
        if next.insert(u, v).is_some() {
            return Some(format!("vertex {u} has out-degree above 1"));
        }
        if !seen_in.insert(v) {
            return Some(format!("vertex {v} has in-degree above 1"));
        }
    }
    // With all degrees at most 1, any arc whose tail is not a start lies on a
    // path unless it lies on a cycle.
    let mut on_path = BTreeSet::new();
    for &u in next.keys() {
        if seen_in.contains(&u) {
            continue;
        }
        let mut x = u;
        while let Some(&y) = next.get(&x) {
            on_path.insert(x);
            x = y;
        }
    }
    next.keys().find(|u| !on_path.contains(u)).map(|u| format!("cycle through {u}"))
}

pub fn is_linear_forest(arcs: &[Arc]) -> bool {
    linear_forest_violation(arcs).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let f = LinearForest::new([9], &[(1, 2), (2, 3), (5, 4)]).unwrap();
        assert_eq!(f.starts(), [1, 5, 9].into());
        assert_eq!(f.ends(), [3, 4, 9].into());
        assert_eq!(f.internal(), [2].into());
        assert_eq!(f.paths(), vec![vec![1, 2, 3], vec![5, 4], vec![9]]);
    }

    #[test]
    fn rejects() {
        assert!(!is_linear_forest(&[(1, 2), (2, 1)]));
        assert!(!is_linear_forest(&[(1, 2), (1, 3)]));
        assert!(!is_linear_forest(&[(1, 3), (2, 3)]));
        assert!(!is_linear_forest(&[(0, 1), (1, 2), (2, 3), (3, 1)]));
        assert!(is_linear_forest(&[]));
    }
}
