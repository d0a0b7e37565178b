//! Robust outneighbourhoods, the bipartite robust outexpander test, and the
//! expander-or-close classification of a regular bipartite tournament.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::{is_regular, Digraph, Side, Vertex};
use crate::error::{Error, Result};
use crate::partition::{pair_counts, QuadPartition};

/// Largest class size the exhaustive tester accepts.
pub const EXHAUSTIVE_CLASS_CAP: usize = 20;

const TOL: f64 = 1e-9;

/// `⌈x⌉`, forgiving float noise such as `0.05 * 20 = 1.0000000000000002`.
pub(crate) fn ceil_tol(x: f64) -> usize {
    (x - TOL).ceil().max(0.0) as usize
}

pub(crate) fn floor_tol(x: f64) -> usize {
    (x + TOL).floor().max(0.0) as usize
}

/// Class size behind the thresholds: the larger side for an even number of
/// classes, the vertex count otherwise.
fn class_size(d: &Digraph) -> usize {
    if d.n_classes() % 2 == 0 {
        d.side_members(Side::A).len().max(d.side_members(Side::B).len())
    } else {
        d.n()
    }
}

/// Vertices with at least `⌈ν·n⌉` inneighbours in `s`.
pub fn robust_out_nbhd(d: &Digraph, s: &[Vertex], nu: f64) -> Vec<Vertex> {
    let thr = ceil_tol(nu * class_size(d) as f64);
    let mut mask = fixedbitset::FixedBitSet::with_capacity(d.n());
    for &v in s {
        mask.insert(v);
    }
    (0..d.n()).filter(|&v| d.in_nbrs(v).intersection(&mask).count() >= thr).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpanderMode {
    Exhaustive,
    /// Random subsets; a pass only means no witness turned up.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExpanderVerdict {
    /// `proof` is set only by the exhaustive mode.
    Expander { nu: f64, tau: f64, proof: bool },
    /// `|RN(set)| < |set| + νn`.
    Witness { set: Vec<Vertex>, robust_nbhd: Vec<Vertex> },
}

impl ExpanderVerdict {
    pub fn is_expander(&self) -> bool {
        matches!(self, ExpanderVerdict::Expander { .. })
    }
}

struct Tester {
    sides: [Vec<Vertex>; 2],
    // in_masks[k][j]: inneighbours of sides[1-k][j] inside sides[k], as bits
    in_masks: [Vec<u32>; 2],
    thr: u32,
    lo: usize,
    hi: usize,
    need: f64,
}

impl Tester {
    fn new(d: &Digraph, nu: f64, tau: f64) -> Result<Self> {
        if d.n_classes() % 2 != 0 || !d.is_bipartite() {
            return Err(Error::invalid("expansion test needs a bipartite digraph"));
        }
        let a = d.side_members(Side::A);
        let b = d.side_members(Side::B);
        if a.len() != b.len() {
            return Err(Error::invalid(format!("sides have sizes {} and {}", a.len(), b.len())));
        }
        let n = a.len();
        let sides = [a, b];
        let in_masks = [0, 1].map(|k| {
            let (src, dst) = (&sides[k], &sides[1 - k]);
            dst.iter()
                .map(|&y| src.iter().enumerate().filter(|&(_, &x)| d.has_arc(x, y)).fold(0u32, |m, (i, _)| m | (1 << i)))
                .collect()
        });
        Ok(Tester {
            sides,
            in_masks,
            thr: ceil_tol(nu * n as f64) as u32,
            lo: ceil_tol(tau * n as f64),
            hi: floor_tol((1.0 - tau) * n as f64),
            need: nu * n as f64,
        })
    }

    fn rn_size(&self, k: usize, s: u32) -> usize {
        self.in_masks[k].iter().filter(|&&m| (m & s).count_ones() >= self.thr).count()
    }

    fn fails(&self, k: usize, s: u32) -> bool {
        (self.rn_size(k, s) as f64) < s.count_ones() as f64 + self.need - TOL
    }

    fn members(&self, k: usize, s: u32) -> Vec<Vertex> {
        self.sides[k].iter().enumerate().filter(|&(i, _)| s >> i & 1 == 1).map(|(_, &v)| v).collect()
    }

    fn rn(&self, k: usize, s: u32) -> Vec<Vertex> {
        let other = &self.sides[1 - k];
        self.in_masks[k].iter().enumerate().filter(|&(_, &m)| (m & s).count_ones() >= self.thr).map(|(j, _)| other[j]).collect()
    }

    /// Failing sets in order: side A before side B, masks ascending.
    fn for_each_failing(&self, visit: &mut dyn FnMut(&Tester, usize, u32) -> bool) {
        let n = self.sides[0].len();
        if self.lo > self.hi {
            return;
        }
        for k in 0..2 {
            for s in 0u32..(1u32 << n) {
                let size = s.count_ones() as usize;
                if size < self.lo || size > self.hi {
                    continue;
                }
                if self.fails(k, s) && !visit(self, k, s) {
                    return;
                }
            }
        }
    }
}

/// Checks the bipartite robust `(ν, τ)`-outexpansion of `d`, whose sides are
/// read from its class labels.
pub fn is_bip_robust_outexpander(d: &Digraph, nu: f64, tau: f64, mode: ExpanderMode) -> Result<ExpanderVerdict> {
    let t = Tester::new(d, nu, tau)?;
    let n = t.sides[0].len();
    match mode {
        ExpanderMode::Exhaustive => {
            if n > EXHAUSTIVE_CLASS_CAP {
                return Err(Error::size("class size for exhaustive expansion test", n, EXHAUSTIVE_CLASS_CAP));
            }
            let mut witness = None;
            t.for_each_failing(&mut |t, k, s| {
                witness = Some(ExpanderVerdict::Witness { set: t.members(k, s), robust_nbhd: t.rn(k, s) });
                false
            });
            Ok(witness.unwrap_or(ExpanderVerdict::Expander { nu, tau, proof: true }))
        }
        ExpanderMode::Sampled { samples, seed } => {
            if n > 32 {
                return Err(Error::size("class size for sampled expansion test", n, 32));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if t.lo <= t.hi {
                let idx: Vec<usize> = (0..n).collect();
                for _ in 0..samples {
                    let k = rng.gen_range(0..2);
                    let size = rng.gen_range(t.lo..=t.hi);
                    let s = idx.choose_multiple(&mut rng, size).fold(0u32, |m, &i| m | (1 << i));
                    if t.fails(k, s) {
                        return Ok(ExpanderVerdict::Witness { set: t.members(k, s), robust_nbhd: t.rn(k, s) });
                    }
                }
            }
            Ok(ExpanderVerdict::Expander { nu, tau, proof: false })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExpansionCertificate {
    Expander {
        nu: f64,
        tau: f64,
        proof: bool,
    },
    /// `backward[i] = e(U_i, U_{i-1})` under `partition`; each is at most `bound`.
    Close {
        witness: Vec<Vertex>,
        robust_nbhd: Vec<Vertex>,
        partition: QuadPartition,
        backward: [usize; 4],
        bound: f64,
    },
}

impl ExpansionCertificate {
    pub fn is_close(&self) -> bool {
        matches!(self, ExpansionCertificate::Close { .. })
    }

    pub fn backward_total(&self) -> Option<usize> {
        match self {
            ExpansionCertificate::Close { backward, .. } => Some(backward.iter().sum()),
            _ => None,
        }
    }
}

/// The first `k` vertices of `side`, members of `prefer` first, then by id.
fn balanced_pick(side: &[Vertex], prefer: &[Vertex], k: usize) -> Vec<Vertex> {
    let mut ranked = side.to_vec();
    ranked.sort_by_key(|v| (!prefer.contains(v), *v));
    ranked.truncate(k);
    ranked.sort_unstable();
    ranked
}

/// From a failing set `A′`, the partition with `U1` closest to `A′` and `U2`
/// closest to `B′ = RN(A′)`.
pub(crate) fn close_partition(t: &Digraph, witness: &[Vertex], rn: &[Vertex], n: usize) -> Result<QuadPartition> {
    let side = t.side(witness[0]);
    let other = if side == Side::A { Side::B } else { Side::A };
    let xs = t.side_members(side);
    let ys = t.side_members(other);
    let u1 = balanced_pick(&xs, witness, n);
    let u2 = balanced_pick(&ys, rn, n);
    let u3: Vec<Vertex> = xs.iter().copied().filter(|v| !u1.contains(v)).collect();
    let u4: Vec<Vertex> = ys.iter().copied().filter(|v| !u2.contains(v)).collect();
    QuadPartition::new(t, [u1, u2, u3, u4])
}

/// Either an exhaustive proof that `t` is a bipartite robust
/// `(ν′, τ)`-outexpander, or a partition built from a failing set whose
/// backward pair counts are at most `4√ν′·n²`.
///
/// Failing sets are tried in the tester's order until one yields a partition
/// within the bound.
pub fn classify_two_cases(t: &Digraph, nu_prime: f64, tau: f64) -> Result<ExpansionCertificate> {
    if !t.is_tournament() {
        return Err(Error::invalid("classification needs a bipartite tournament"));
    }
    let side = t.side_members(Side::A).len();
    let n = side / 2;
    if side != t.side_members(Side::B).len() || side % 2 != 0 || is_regular(t) != Some(n) {
        return Err(Error::invalid("classification needs an n-regular tournament with classes of size 2n"));
    }
    if side > EXHAUSTIVE_CLASS_CAP {
        return Err(Error::size("class size for two-cases classification", side, EXHAUSTIVE_CLASS_CAP));
    }
    let tester = Tester::new(t, nu_prime, tau)?;
    let bound = 4.0 * nu_prime.sqrt() * (n * n) as f64;
    let mut any = false;
    let mut found: Option<Result<ExpansionCertificate>> = None;
    tester.for_each_failing(&mut |ts, k, s| {
        any = true;
        let witness = ts.members(k, s);
        let rn = robust_out_nbhd(t, &witness, nu_prime);
        let partition = match close_partition(t, &witness, &rn, n) {
            Ok(p) => p,
            Err(e) => {
                found = Some(Err(e));
                return false;
            }
        };
        let backward = pair_counts(t, &partition).0;
        if backward.iter().all(|&b| b as f64 <= bound + TOL) {
            found = Some(Ok(ExpansionCertificate::Close { witness, robust_nbhd: rn, partition, backward, bound }));
            return false;
        }
        true
    });
    match found {
        Some(r) => {
            let cert = r?;
            check_certificate(t, &cert, nu_prime)?;
            Ok(cert)
        }
        None if !any => Ok(ExpansionCertificate::Expander { nu: nu_prime, tau, proof: true }),
        None => Err(Error::size("class size at which no failing set gives a close partition", side, side - 1)),
    }
}

/// Recounts a close certificate from scratch.
pub fn check_certificate(t: &Digraph, cert: &ExpansionCertificate, nu_prime: f64) -> Result<()> {
    let ExpansionCertificate::Close { witness, robust_nbhd, partition, backward, bound } = cert else {
        return Ok(());
    };
    let name = "two-cases certificate";
    if robust_out_nbhd(t, witness, nu_prime) != *robust_nbhd {
        return Err(Error::invariant(name, "robust outneighbourhood does not recount"));
    }
    let recount = pair_counts(t, partition).0;
    if recount != *backward {
        return Err(Error::invariant(name, format!("backward counts {backward:?} recount as {recount:?}")));
    }
    let n = partition.n();
    let fresh = 4.0 * nu_prime.sqrt() * (n * n) as f64;
    if (fresh - bound).abs() > TOL || recount.iter().any(|&b| b as f64 > fresh + TOL) {
        return Err(Error::invariant(name, format!("backward counts {recount:?} exceed {fresh}")));
    }
    let overlap = witness.iter().filter(|v| partition.class(0).contains(v)).count();
    let want = witness.len().min(n);
    if overlap != want {
        return Err(Error::invariant(name, "U1 is not a balanced truncation or extension of the witness"));
    }
    Ok(())
}
