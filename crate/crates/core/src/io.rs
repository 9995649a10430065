//! DIMACS-style graph files, decomposition JSON, DOT and plain text.
//! External vertex ids are 1-based throughout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decomposition::{fill_separations, Node, TorsoClass, TreeDecomposition};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads `p <n> <m>` followed by `e <u> <v>` lines; `c` lines and blank
/// lines are skipped. `p edge <n> <m>` is accepted too.
pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut tok = raw.split_whitespace();
        let Some(kind) = tok.next() else { continue };
        let nums = |tok: std::str::SplitWhitespace<'_>| -> Result<Vec<usize>> {
            tok.filter(|t| *t != "edge" && *t != "col")
                .map(|t| t.parse::<usize>().map_err(|_| parse_err(line, format!("not a number: {t}"))))
                .collect()
        };
        match kind {
            "c" => {}
            "p" => {
                if header.is_some() {
                    return Err(parse_err(line, "second header line"));
                }
                match nums(tok)?[..] {
                    [n, m] => header = Some((n, m)),
                    _ => return Err(parse_err(line, "expected `p <n> <m>`")),
                }
            }
            "e" => {
                let Some((n, _)) = header else {
                    return Err(parse_err(line, "edge before header"));
                };
                let (u, v) = match nums(tok)?[..] {
                    [u, v] => (u, v),
                    _ => return Err(parse_err(line, "expected `e <u> <v>`")),
                };
                for x in [u, v] {
                    if x == 0 || x > n {
                        return Err(parse_err(line, format!("vertex {x} outside 1..={n}")));
                    }
                }
                if u == v {
                    return Err(parse_err(line, format!("self-loop at {u}")));
                }
                edges.push((u - 1, v - 1));
            }
            other => return Err(parse_err(line, format!("unknown line type `{other}`"))),
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing `p` header"))?;
    if edges.len() != m {
        return Err(parse_err(0, format!("header announces {m} edges, found {}", edges.len())));
    }
    Graph::new(n, edges)
}

pub fn write_dimacs(g: &Graph) -> String {
    let mut out = format!("p {} {}\n", g.n(), g.m());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub bag: Vec<usize>,
    pub torso: String,
    pub tangle: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub parent: usize,
    pub child: usize,
    pub separator: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

pub fn class_name(c: TorsoClass) -> String {
    match c {
        TorsoClass::Complete(k) => format!("K{k}"),
        TorsoClass::Quasi4 => "quasi4".into(),
        TorsoClass::Triconnected => "triconnected".into(),
        TorsoClass::Biconnected => "biconnected".into(),
    }
}

fn parse_class(s: &str) -> Option<TorsoClass> {
    match s {
        "quasi4" => Some(TorsoClass::Quasi4),
        "triconnected" => Some(TorsoClass::Triconnected),
        "biconnected" => Some(TorsoClass::Biconnected),
        _ => s.strip_prefix('K')?.parse().ok().map(TorsoClass::Complete),
    }
}

fn external(s: &VertexSet) -> Vec<usize> {
    s.iter().map(|v| v + 1).collect()
}

pub fn to_json_value(td: &TreeDecomposition) -> DecompositionJson {
    let tangles = td.tangle_nodes();
    let nodes = td
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| NodeJson { id, bag: external(&n.bag), torso: class_name(n.class), tangle: tangles.contains(&id) })
        .collect();
    let edges = td
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(child, n)| {
            n.parent.map(|parent| EdgeJson { parent, child, separator: external(&n.bag.intersection(&td.nodes()[parent].bag)) })
        })
        .collect();
    DecompositionJson { nodes, edges }
}

pub fn to_json(td: &TreeDecomposition) -> String {
    serde_json::to_string_pretty(&to_json_value(td)).expect("plain data serializes")
}

/// Rebuilds a decomposition of `g` from JSON; separations are recomputed
/// from the bags and witness models are not stored.
pub fn from_json(g: &Graph, text: &str) -> Result<TreeDecomposition> {
    let doc: DecompositionJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.iter().enumerate() {
        if n.id != i {
            return Err(parse_err(0, format!("node ids must be 0..{}, found {}", doc.nodes.len(), n.id)));
        }
        let class = parse_class(&n.torso).ok_or_else(|| parse_err(0, format!("unknown torso class {}", n.torso)))?;
        let mut bag = Vec::with_capacity(n.bag.len());
        for &v in &n.bag {
            if v == 0 || v > g.n() {
                return Err(parse_err(0, format!("bag vertex {v} outside 1..={}", g.n())));
            }
            bag.push(v - 1);
        }
        nodes.push(Node { bag: bag.into_iter().collect(), parent: None, separation: None, class, witness: None });
    }
    for e in &doc.edges {
        if e.child >= nodes.len() || e.parent >= nodes.len() || nodes[e.child].parent.is_some() {
            return Err(parse_err(0, format!("bad tree edge {}-{}", e.parent, e.child)));
        }
        nodes[e.child].parent = Some(e.parent);
    }
    let mut td = TreeDecomposition::from_nodes(nodes);
    if td.nodes().iter().enumerate().all(|(t, n)| n.parent.map_or(t == 0, |p| p < t)) {
        fill_separations(g, &mut td);
    }
    Ok(td)
}

pub fn to_dot(td: &TreeDecomposition) -> String {
    let doc = to_json_value(td);
    let mut out = String::from("graph decomposition {\n  node [shape=box];\n");
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    for n in &doc.nodes {
        let style = if n.tangle { ", style=bold" } else { "" };
        let _ = writeln!(out, "  n{} [label=\"{}: {{{}}} {}\"{}];", n.id, n.id, list(&n.bag), n.torso, style);
    }
    for e in &doc.edges {
        let _ = writeln!(out, "  n{} -- n{} [label=\"{{{}}}\"];", e.parent, e.child, list(&e.separator));
    }
    out.push_str("}\n");
    out
}

pub fn to_text(td: &TreeDecomposition) -> String {
    let doc = to_json_value(td);
    let mut out = format!("nodes {} adhesion {}\n", doc.nodes.len(), td.adhesion());
    for (n, node) in doc.nodes.iter().zip(td.nodes()) {
        let parent = node.parent.map_or("-".to_string(), |p| p.to_string());
        let mark = if n.tangle { " tangle" } else { "" };
        let _ = writeln!(out, "{} parent {} {} {:?}{}", n.id, parent, n.torso, n.bag, mark);
    }
    out
}
