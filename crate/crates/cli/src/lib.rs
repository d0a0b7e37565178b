//! Front end for `bitour-core`: instance files, JSON reports, and the tasks
//! behind the `bitour` binary.

use std::collections::BTreeMap;

use bitour_core::digraph::{
    make_blowup_cycle, one_flipped_c4, random_regular_bitournament, tripartite_counterexample, Arc, Digraph, Vertex,
};
use bitour_core::feasible::{decompose_backward_and_exceptional, FeasibilityContext};
use bitour_core::hamilton::{
    classify_two_cases, cycle_arcs, decompose_tournament, verify_decomposition, CycleBalance, DecomposeOptions,
    ExpansionCertificate,
};
use bitour_core::partition::{
    exceptional_set, gamma_sets, optimal_partition, pair_counts, PartitionMode, QuadPartition, EXACT_CLASS_CAP,
};
use bitour_core::{Error, Params};
use serde_json::{json, Value};

pub mod format;

pub use format::{instance_hash, parse_edge_list, write_edge_list, ParseError};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Core(Error),
    /// The re-verification found violations; carries the verdict report.
    Verify(Value),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Core(Error::Invariant { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Verify(v) => write!(f, "verification failed: {}", v["violations"]),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Blowup,
    Flipped,
    Random,
    Tripartite,
}

impl std::str::FromStr for GenKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "blowup" => Ok(GenKind::Blowup),
            "flipped" => Ok(GenKind::Flipped),
            "random" => Ok(GenKind::Random),
            "tripartite" => Ok(GenKind::Tripartite),
            _ => Err(format!("unknown kind `{s}` (blowup, flipped, random, tripartite)")),
        }
    }
}

pub fn generate(kind: GenKind, n: usize, flips: usize, seed: u64) -> Result<Digraph, CliError> {
    Ok(match kind {
        GenKind::Blowup => make_blowup_cycle(4, n)?,
        GenKind::Flipped => one_flipped_c4(n)?,
        GenKind::Random => random_regular_bitournament(n, flips, seed)?,
        GenKind::Tripartite => tripartite_counterexample(n)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Partition,
    Classify,
    Systems,
    Decompose,
    Verify,
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "partition" => Ok(Task::Partition),
            "classify" => Ok(Task::Classify),
            "systems" => Ok(Task::Systems),
            "decompose" => Ok(Task::Decompose),
            "verify" => Ok(Task::Verify),
            _ => Err(format!("unknown task `{s}` (partition, classify, systems, decompose, verify)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Auto,
    Exact,
    Local,
}

impl std::str::FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(ModeArg::Auto),
            "exact" => Ok(ModeArg::Exact),
            "local" => Ok(ModeArg::Local),
            _ => Err(format!("unknown mode `{s}` (auto, exact, local)")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub params: Params,
    pub seed: u64,
    pub cap: usize,
    pub mode: ModeArg,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { params: Params::default(), seed: 0, cap: DecomposeOptions::default().cap, mode: ModeArg::Auto }
    }
}

impl RunConfig {
    fn partition_mode(&self, d: &Digraph) -> PartitionMode {
        match self.mode {
            ModeArg::Exact => PartitionMode::Exact,
            ModeArg::Local => PartitionMode::Local,
            ModeArg::Auto if d.n() / 2 <= EXACT_CLASS_CAP => PartitionMode::Exact,
            ModeArg::Auto => PartitionMode::Local,
        }
    }

    fn to_json(self) -> Value {
        let p = self.params;
        let mode = match self.mode {
            ModeArg::Auto => "auto",
            ModeArg::Exact => "exact",
            ModeArg::Local => "local",
        };
        json!({
            "eps": p.eps, "eps_prime": p.eps_prime, "gamma": p.gamma, "nu": p.nu, "nu_prime": p.nu_prime,
            "tau": p.tau, "seed": self.seed, "cap": self.cap, "mode": mode,
        })
    }
}

pub fn arcs_json(arcs: &[Arc]) -> Value {
    Value::Array(arcs.iter().map(|&(u, v)| json!([u, v])).collect())
}

fn partition_json(u: &QuadPartition) -> Value {
    json!(u.classes())
}

fn certificate_json(c: &ExpansionCertificate) -> Value {
    match c {
        ExpansionCertificate::Expander { nu, tau, proof } => json!({"kind": "expander", "nu": nu, "tau": tau, "proof": proof}),
        ExpansionCertificate::Close { witness, robust_nbhd, partition, backward, bound } => json!({
            "kind": "close",
            "witness": witness,
            "robust_nbhd": robust_nbhd,
            "partition": partition_json(partition),
            "backward": backward,
            "backward_total": backward.iter().sum::<usize>(),
            "bound": bound,
        }),
    }
}

fn balance_json(b: &[CycleBalance]) -> Value {
    Value::Array(b.iter().map(|b| json!({"backward": b.backward, "ell": b.ell})).collect())
}

/// Report skeleton shared by every task; `serde_json` keeps keys sorted, so
/// the serialization is canonical.
fn report(d: &Digraph, task: &str, cfg: &RunConfig) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("instance_hash".into(), json!(instance_hash(d)));
    m.insert("task".into(), json!(task));
    m.insert("params".into(), cfg.to_json());
    m.insert("certificate".into(), Value::Null);
    m.insert("systems".into(), json!([]));
    m.insert("cycles".into(), json!([]));
    m.insert("diagnostics".into(), json!({}));
    m
}

fn finish(m: BTreeMap<String, Value>) -> Value {
    Value::Object(m.into_iter().collect())
}

/// Runs one task on one instance. `prior` is the report `verify` checks.
pub fn run_task(task: Task, d: &Digraph, cfg: &RunConfig, prior: Option<&Value>) -> Result<Value, CliError> {
    cfg.params.validate()?;
    match task {
        Task::Partition => {
            let u = optimal_partition(d, cfg.partition_mode(d))?;
            let (back, fwd) = pair_counts(d, &u);
            let low = gamma_sets(d, &u, cfg.params.gamma);
            let high = gamma_sets(d, &u, 1.0 - cfg.params.gamma);
            let ex = match exceptional_set(d, &u, cfg.params.eps_prime) {
                Ok(ex) => json!(ex.members().ones().collect::<Vec<_>>()),
                Err(e) => json!({"error": e.to_string()}),
            };
            let mut m = report(d, "partition", cfg);
            m.insert("partition".into(), partition_json(&u));
            m.insert(
                "diagnostics".into(),
                json!({
                    "backward": back, "forward": fwd, "backward_total": back.iter().sum::<usize>(),
                    "gamma_set": low.sets, "high_set": high.sets, "exceptional": ex,
                }),
            );
            Ok(finish(m))
        }
        Task::Classify => {
            let c = classify_two_cases(d, cfg.params.nu_prime, cfg.params.tau)?;
            let mut m = report(d, "classify", cfg);
            m.insert("certificate".into(), certificate_json(&c));
            Ok(finish(m))
        }
        Task::Systems => {
            let u = optimal_partition(d, cfg.partition_mode(d))?;
            let ex = exceptional_set(d, &u, cfg.params.eps_prime)?;
            let ctx = FeasibilityContext::new(d.clone(), u.clone(), ex, cfg.params.gamma)?;
            let systems = decompose_backward_and_exceptional(&ctx, &[], cfg.params.eps)?;
            let mut m = report(d, "systems", cfg);
            m.insert("partition".into(), partition_json(&u));
            m.insert("systems".into(), Value::Array(systems.iter().map(|s| arcs_json(s)).collect()));
            m.insert("diagnostics".into(), json!({"exceptional": ctx.exceptional.members().ones().collect::<Vec<_>>()}));
            Ok(finish(m))
        }
        Task::Decompose => {
            let opts = DecomposeOptions { cap: cfg.cap, seed: cfg.seed, ..Default::default() };
            let r = decompose_tournament(d, &cfg.params, &opts)?;
            let mut m = report(d, "decompose", cfg);
            m.insert("status".into(), json!(r.status.as_str()));
            m.insert("certificate".into(), r.certificate.as_ref().map_or(Value::Null, certificate_json));
            m.insert("partition".into(), r.partition.as_ref().map_or(Value::Null, partition_json));
            m.insert("cycles".into(), Value::Array(r.cycles.iter().map(|c| arcs_json(&cycle_arcs(c))).collect()));
            m.insert(
                "diagnostics".into(),
                json!({"balance": balance_json(&r.diagnostics), "residual": arcs_json(&r.residual), "notes": r.notes}),
            );
            Ok(finish(m))
        }
        Task::Verify => {
            let prior = prior.ok_or_else(|| CliError::Usage("verify needs --report".into()))?;
            verify_report(d, cfg, prior)
        }
    }
}

/// Vertex order of a cycle given as arcs, or `None` if the arcs are not one cycle.
pub fn cycle_order(arcs: &[Arc]) -> Option<Vec<Vertex>> {
    let succ: BTreeMap<Vertex, Vertex> = arcs.iter().copied().collect();
    if succ.len() != arcs.len() || arcs.is_empty() {
        return None;
    }
    let start = arcs[0].0;
    let mut order = vec![start];
    let mut x = succ[&start];
    while x != start {
        if order.len() > arcs.len() {
            return None;
        }
        order.push(x);
        x = *succ.get(&x)?;
    }
    (order.len() == arcs.len()).then_some(order)
}

fn read_arcs(v: &Value) -> Option<Vec<Arc>> {
    v.as_array()?
        .iter()
        .map(|p| {
            let p = p.as_array()?;
            if p.len() != 2 {
                return None;
            }
            Some((p[0].as_u64()? as usize, p[1].as_u64()? as usize))
        })
        .collect()
}

fn verify_report(d: &Digraph, cfg: &RunConfig, prior: &Value) -> Result<Value, CliError> {
    let mut violations: Vec<String> = Vec::new();
    let hash = instance_hash(d);
    if prior["instance_hash"].as_str() != Some(hash.as_str()) {
        violations.push(format!("report is for instance {}, not {hash}", prior["instance_hash"]));
    }
    let cycles_json = prior["cycles"].as_array().ok_or_else(|| CliError::Parse("report has no `cycles` array".into()))?;
    let mut cycles = Vec::new();
    for (j, c) in cycles_json.iter().enumerate() {
        let arcs = read_arcs(c).ok_or_else(|| CliError::Parse(format!("cycle {j} is not a list of [u, v] pairs")))?;
        if arcs.iter().any(|&(u, v)| u >= d.n() || v >= d.n()) {
            violations.push(format!("cycle {j} names a vertex outside 0..{}", d.n()));
            continue;
        }
        match cycle_order(&arcs) {
            Some(order) => cycles.push(order),
            None => violations.push(format!("cycle {j} is not a single directed cycle")),
        }
    }
    let partition = match &prior["partition"] {
        Value::Array(classes) if classes.len() == 4 => {
            let cl: Option<Vec<Vec<Vertex>>> =
                classes.iter().map(|c| c.as_array()?.iter().map(|x| x.as_u64().map(|x| x as usize)).collect()).collect();
            let cl = cl.ok_or_else(|| CliError::Parse("partition classes must be vertex lists".into()))?;
            match QuadPartition::new(d, [cl[0].clone(), cl[1].clone(), cl[2].clone(), cl[3].clone()]) {
                Ok(u) => Some(u),
                Err(e) => {
                    violations.push(format!("partition is invalid: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    let rep = verify_decomposition(d, &cycles, partition.as_ref());
    violations.extend(rep.violations);
    let mut m = report(d, "verify", cfg);
    m.insert("ok".into(), json!(violations.is_empty()));
    m.insert("violations".into(), json!(violations));
    m.insert("diagnostics".into(), json!({"balance": balance_json(&rep.balance)}));
    let v = finish(m);
    if violations.is_empty() {
        Ok(v)
    } else {
        Err(CliError::Verify(v))
    }
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
