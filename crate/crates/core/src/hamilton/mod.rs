//! Hamilton cycles and Hamilton decompositions: exact search, assembly
//! around feasible systems in a near blow-up of `C_4`, the decomposition
//! driver and its verifier, and the expander-or-close classification.

use std::collections::BTreeSet;

use crate::digraph::{Arc, Digraph, Vertex};
use crate::feasible::cycle_ell;
use crate::partition::QuadPartition;

mod assemble;
mod expander;
mod search;

pub use assemble::{blowup_c4_hamilton, decompose_tournament, DecomposeOptions};
pub use expander::{
    check_certificate, classify_two_cases, is_bip_robust_outexpander, robust_out_nbhd, ExpanderMode, ExpanderVerdict,
    ExpansionCertificate, EXHAUSTIVE_CLASS_CAP,
};
pub use search::{exact_hamilton, exhaustive_decomposition, EXHAUSTIVE_DECOMPOSITION_CAP, HAMILTON_CAP};

/// Arcs of a cycle given as a vertex sequence.
pub fn cycle_arcs(cycle: &[Vertex]) -> Vec<Arc> {
    search::cycle_arcs(cycle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    Partial,
    Infeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Complete => "complete",
            Status::Partial => "partial",
            Status::Infeasible => "infeasible",
        }
    }
}

/// `backward[i] = e_C(U_i, U_{i-1})`; `ell` is `None` when the class
/// constants of the cycle disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleBalance {
    pub backward: [usize; 4],
    pub ell: Option<i64>,
}

pub fn cycle_balance(cycle: &[Vertex], u: &QuadPartition) -> CycleBalance {
    let mut backward = [0; 4];
    for (a, b) in cycle_arcs(cycle) {
        if u.is_backward(a, b) {
            backward[u.index_of(a)] += 1;
        }
    }
    CycleBalance { backward, ell: cycle_ell(cycle, u).ok() }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub status: Status,
    pub cycles: Vec<Vec<Vertex>>,
    /// Arcs of T on none of `cycles`; empty when complete.
    pub residual: Vec<Arc>,
    pub partition: Option<QuadPartition>,
    pub certificate: Option<ExpansionCertificate>,
    pub diagnostics: Vec<CycleBalance>,
    /// Which routine produced the cycles, and why earlier ones gave up.
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<String>,
    pub balance: Vec<CycleBalance>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `cycles` are Hamilton cycles of `t` partitioning `E(t)`, and
/// with `u` the balance identities and the class constant of each cycle.
pub fn verify_decomposition(t: &Digraph, cycles: &[Vec<Vertex>], u: Option<&QuadPartition>) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let n = t.n();
    let mut seen: BTreeSet<Arc> = BTreeSet::new();
    for (j, c) in cycles.iter().enumerate() {
        let distinct: BTreeSet<Vertex> = c.iter().copied().collect();
        if distinct.len() != c.len() || distinct.iter().any(|&v| v >= n) {
            rep.violations.push(format!("cycle {j} repeats a vertex or leaves the vertex range"));
            continue;
        }
        if c.len() != n {
            rep.violations.push(format!("cycle {j} does not visit every vertex"));
        }
        for (a, b) in cycle_arcs(c) {
            if !t.has_arc(a, b) {
                rep.violations.push(format!("cycle {j} uses ({a},{b}), which is not an edge"));
            } else if !seen.insert((a, b)) {
                rep.violations.push(format!("edge ({a},{b}) lies on two cycles"));
            }
        }
        if let Some(u) = u {
            let bal = cycle_balance(c, u);
            let [b1, b2, b3, b4] = bal.backward;
            if b1 != b3 {
                rep.violations.push(format!("cycle {j}: e(U1,U4) = {b1} but e(U3,U2) = {b3}"));
            }
            if b2 != b4 {
                rep.violations.push(format!("cycle {j}: e(U2,U1) = {b2} but e(U4,U3) = {b4}"));
            }
            match bal.ell {
                None => rep.violations.push(format!("cycle {j}: no common class constant")),
                Some(l) => {
                    let back: usize = bal.backward.iter().sum();
                    let wind = (c.len() as i64 - 2 * back as i64) / 4;
                    if (c.len() as i64 - 2 * back as i64) % 4 != 0 || wind != l {
                        rep.violations.push(format!("cycle {j}: class constant {l} is not the winding number"));
                    }
                }
            }
            rep.balance.push(bal);
        }
    }
    for (a, b) in t.arcs() {
        if !seen.contains(&(a, b)) {
            rep.violations.push(format!("edge ({a},{b}) is on no cycle"));
        }
    }
    rep
}
