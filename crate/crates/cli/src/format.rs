//! The plain-text edge-list format.
//!
//! ```text
//! bitour <n_vertices> <n_classes>
//! class <vertex_id> <class_index>     # one per vertex, class_index in 1..=n_classes
//! <u> <v>                             # one per directed edge
//! ```

use std::collections::BTreeSet;

use bitour_core::digraph::{Arc, Digraph};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

fn num(tok: Option<&str>, line: usize, what: &str) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("{what} `{tok}` is not a non-negative integer")))
}

pub fn parse_edge_list(text: &str) -> Result<Digraph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut class: Vec<Option<usize>> = Vec::new();
    let mut arcs: Vec<Arc> = Vec::new();
    let mut seen: BTreeSet<Arc> = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let first = toks.next().unwrap();
        match (first, header) {
            ("bitour", None) => {
                let nv = num(toks.next(), line, "vertex count")?;
                let nc = num(toks.next(), line, "class count")?;
                if nc == 0 {
                    return Err(err(line, "class count must be positive"));
                }
                header = Some((nv, nc));
                class = vec![None; nv];
            }
            ("bitour", Some(_)) => return Err(err(line, "second header")),
            (_, None) => return Err(err(line, "expected the header `bitour <n_vertices> <n_classes>`")),
            ("class", Some((nv, nc))) => {
                let v = num(toks.next(), line, "vertex id")?;
                let c = num(toks.next(), line, "class index")?;
                if v >= nv {
                    return Err(err(line, format!("vertex {v} is outside 0..{nv}")));
                }
                if c < 1 || c > nc {
                    return Err(err(line, format!("class index {c} is outside 1..={nc}")));
                }
                if class[v].replace(c - 1).is_some() {
                    return Err(err(line, format!("vertex {v} has two class lines")));
                }
            }
            (_, Some((nv, _))) => {
                let u = num(Some(first), line, "tail")?;
                let v = num(toks.next(), line, "head")?;
                if u >= nv || v >= nv {
                    return Err(err(line, format!("edge ({u},{v}) leaves 0..{nv}")));
                }
                if u == v {
                    return Err(err(line, format!("loop at {u}")));
                }
                if !seen.insert((u, v)) {
                    return Err(err(line, format!("duplicate edge ({u},{v})")));
                }
                arcs.push((u, v));
            }
        }
        if toks.next().is_some() {
            return Err(err(line, "trailing tokens"));
        }
    }
    let Some((_, nc)) = header else {
        return Err(err(0, "empty input"));
    };
    let class: Vec<usize> = class
        .iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| err(0, format!("vertex {v} has no class line"))))
        .collect::<Result<_, _>>()?;
    Digraph::from_arcs(class, nc, &arcs).map_err(|e| err(0, e.to_string()))
}

/// Canonical text: header, class lines by id, edges in ascending order.
pub fn write_edge_list(d: &Digraph) -> String {
    let mut s = format!("bitour {} {}\n", d.n(), d.n_classes());
    for v in 0..d.n() {
        s.push_str(&format!("class {v} {}\n", d.class_of(v) + 1));
    }
    for (u, v) in d.arcs() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

/// First 64 bits of the SHA-256 of the canonical edge list, as hex.
pub fn instance_hash(d: &Digraph) -> String {
    let digest = Sha256::digest(write_edge_list(d).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
