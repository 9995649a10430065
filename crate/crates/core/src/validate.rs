//! Independent checker for tree decompositions.

use std::fmt;
use std::sync::Arc;

use crate::decomposition::{TorsoClass, TreeDecomposition};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::mincut::is_k_connected;
use crate::oracle::enumerate_tangles;
use crate::quasi4::is_quasi_4_connected;

/// Largest graph on which the validator compares against oracle tangles.
pub const TANGLE_COUNT_MAX_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyTree,
    BadParent { node: usize },
    VertexUncovered(Vertex),
    EdgeUncovered(Vertex, Vertex),
    /// Bags holding `vertex` do not form a subtree.
    SubtreeBroken { vertex: Vertex },
    AdhesionTooLarge { node: usize, size: usize, bound: usize },
    MissingSeparation { node: usize },
    SeparatorMismatch { node: usize },
    SubtreeUnionMismatch { node: usize },
    SideNotConnected { node: usize },
    SidesAdjacent { node: usize },
    ClassNotAllowed { node: usize, class: TorsoClass },
    TorsoMismatch { node: usize, detail: String },
    BadWitness { node: usize, detail: String },
    TangleCount { tangles: usize, nodes: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTree => write!(f, "decomposition has no nodes"),
            Violation::BadParent { node } => write!(f, "node {node}: parent link is not a rooted tree"),
            Violation::VertexUncovered(v) => write!(f, "vertex {v} is in no bag"),
            Violation::EdgeUncovered(u, v) => write!(f, "edge {u}-{v} is in no bag"),
            Violation::SubtreeBroken { vertex } => write!(f, "bags containing {vertex} are not connected in the tree"),
            Violation::AdhesionTooLarge { node, size, bound } => {
                write!(f, "node {node}: adhesion {size} exceeds {bound}")
            }
            Violation::MissingSeparation { node } => write!(f, "node {node}: no separation stored"),
            Violation::SeparatorMismatch { node } => write!(f, "node {node}: separator differs from bag intersection"),
            Violation::SubtreeUnionMismatch { node } => write!(f, "node {node}: S and Z differ from the subtree union"),
            Violation::SideNotConnected { node } => write!(f, "node {node}: the subtree side Z is disconnected"),
            Violation::SidesAdjacent { node } => write!(f, "node {node}: stored separation has a Y-Z edge"),
            Violation::ClassNotAllowed { node, class } => write!(f, "node {node}: class {class:?} not allowed at this level"),
            Violation::TorsoMismatch { node, detail } => write!(f, "node {node}: torso {detail}"),
            Violation::BadWitness { node, detail } => write!(f, "node {node}: witness model {detail}"),
            Violation::TangleCount { tangles, nodes } => {
                write!(f, "{tangles} order-4 tangles but {nodes} tangle-carrying nodes")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
    /// Set when the oracle tangle count was compared.
    pub tangle_count: Option<(usize, usize)>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Compare against oracle order-4 tangles up to this many vertices.
    pub tangle_count_max_n: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { tangle_count_max_n: TANGLE_COUNT_MAX_N }
    }
}

pub fn validate_decomposition(g: &Arc<Graph>, td: &TreeDecomposition, level: u8) -> Report {
    validate_decomposition_with(g, td, level, ValidateOptions::default())
}

pub fn validate_decomposition_with(g: &Arc<Graph>, td: &TreeDecomposition, level: u8, opts: ValidateOptions) -> Report {
    let mut out = Vec::new();
    let nodes = td.nodes();
    if nodes.is_empty() {
        if g.n() > 0 {
            out.push(Violation::EmptyTree);
        }
        return Report { violations: out, tangle_count: None };
    }
    // Parents must come first so every node reaches the root.
    let mut tree_ok = nodes[0].parent.is_none();
    for (t, n) in nodes.iter().enumerate().skip(1) {
        if !matches!(n.parent, Some(p) if p < t) {
            out.push(Violation::BadParent { node: t });
            tree_ok = false;
        }
    }
    if !tree_ok {
        if nodes[0].parent.is_some() {
            out.push(Violation::BadParent { node: 0 });
        }
        return Report { violations: out, tangle_count: None };
    }

    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (t, n) in nodes.iter().enumerate() {
        for &v in &n.bag {
            if v < g.n() {
                holders[v].push(t);
            }
        }
    }
    for (v, h) in holders.iter().enumerate() {
        if h.is_empty() {
            out.push(Violation::VertexUncovered(v));
        } else {
            // A node set is a subtree iff exactly one member has its parent outside.
            let tops = h.iter().filter(|&&t| nodes[t].parent.is_none_or(|p| !nodes[p].bag.contains(v))).count();
            if tops != 1 {
                out.push(Violation::SubtreeBroken { vertex: v });
            }
        }
    }
    for (u, v) in g.edges() {
        if !holders[u].iter().any(|&t| nodes[t].bag.contains(v)) {
            out.push(Violation::EdgeUncovered(u, v));
        }
    }

    let bound = usize::from(level.saturating_sub(1));
    let mut below: Vec<VertexSet> = nodes.iter().map(|n| n.bag.clone()).collect();
    for t in (1..nodes.len()).rev() {
        let p = nodes[t].parent.unwrap();
        below[p] = below[p].union(&below[t]);
    }
    for (t, n) in nodes.iter().enumerate().skip(1) {
        let p = n.parent.unwrap();
        let s = n.bag.intersection(&nodes[p].bag);
        if s.len() > bound {
            out.push(Violation::AdhesionTooLarge { node: t, size: s.len(), bound });
        }
        let Some(sep) = &n.separation else {
            out.push(Violation::MissingSeparation { node: t });
            continue;
        };
        if sep.s() != &s {
            out.push(Violation::SeparatorMismatch { node: t });
        }
        if sep.s().union(sep.z()) != below[t] || !sep.s().is_disjoint(sep.z()) {
            out.push(Violation::SubtreeUnionMismatch { node: t });
        }
        if !g.is_connected_subset(sep.z()) {
            out.push(Violation::SideNotConnected { node: t });
        }
        if sep.z().iter().any(|&z| g.neighbors(z).iter().any(|&x| sep.y().contains(x))) {
            out.push(Violation::SidesAdjacent { node: t });
        }
    }

    for (t, n) in nodes.iter().enumerate() {
        check_class(g, t, n, level, &mut out);
    }

    let mut tangle_count = None;
    if g.n() <= opts.tangle_count_max_n {
        if let Ok(ts) = enumerate_tangles(g, 4) {
            let carrying = td.tangle_nodes().len();
            tangle_count = Some((ts.len(), carrying));
            if level == 4 && ts.len() != carrying {
                out.push(Violation::TangleCount { tangles: ts.len(), nodes: carrying });
            }
        }
    }
    Report { violations: out, tangle_count }
}

fn check_class(g: &Arc<Graph>, t: usize, n: &crate::decomposition::Node, level: u8, out: &mut Vec<Violation>) {
    let allowed = match (level, n.class) {
        (_, TorsoClass::Complete(k)) => k <= usize::from(level.min(4)),
        (4, TorsoClass::Quasi4) => true,
        (3, TorsoClass::Triconnected) => true,
        (2, TorsoClass::Biconnected) => true,
        _ => false,
    };
    if !allowed {
        out.push(Violation::ClassNotAllowed { node: t, class: n.class });
    }
    let mismatch = |detail: &str| Violation::TorsoMismatch { node: t, detail: detail.to_string() };
    let (torso, map) = g.torso(&n.bag);
    match n.class {
        TorsoClass::Complete(k) => {
            if n.bag.len() != k || !torso.is_complete() {
                out.push(mismatch(&format!("is not K{k}")));
            }
        }
        TorsoClass::Biconnected => {
            let (sub, _) = g.induced_subgraph(&n.bag);
            if n.bag.len() < 3 || !is_k_connected(&sub, 2) {
                out.push(mismatch("is not a 2-connected block"));
            }
        }
        TorsoClass::Triconnected => {
            if n.bag.len() < 4 || !is_k_connected(&torso, 3) {
                out.push(mismatch("is not 3-connected"));
            }
            if g.components(&n.bag).iter().any(|c| g.neighborhood(c).len() > 2) {
                out.push(mismatch("has an outside component with more than two attachments"));
            }
        }
        TorsoClass::Quasi4 => {
            if !is_quasi_4_connected(&torso) {
                out.push(mismatch("is not quasi-4-connected"));
            }
            let bad = |detail: String| Violation::BadWitness { node: t, detail };
            match &n.witness {
                None => out.push(bad("missing".into())),
                Some(w) => {
                    if let Err(e) = w.validate() {
                        out.push(bad(format!("invalid: {e}")));
                    }
                    if w.host().n() != g.n() || !w.host().edges().eq(g.edges()) {
                        out.push(bad("host is not the graph".into()));
                    }
                    if w.pattern().n() != torso.n() || !w.pattern().edges().eq(torso.edges()) {
                        out.push(bad("pattern is not the torso".into()));
                    }
                    if !w.is_faithful() {
                        out.push(bad("is not faithful".into()));
                    }
                    if (0..torso.n()).any(|i| !w.branch_set(i).contains(map.to_host(i))) {
                        out.push(bad("branch set misses its bag vertex".into()));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::*;
    use crate::generators::*;

    fn ok(g: Graph, level: u8) -> Report {
        let g = Arc::new(g);
        let td = decompose_to_level(&g, level).unwrap();
        let r = validate_decomposition(&g, &td, level);
        assert!(r.is_ok(), "{:?}", r.violations);
        r
    }

    #[test]
    fn named_graphs_validate() {
        for name in ["cube", "th3", "tr3", "glued-k5", "truncated-cube", "fig1", "th4:full", "k5", "c5", "hex2"] {
            let g = by_name(name).unwrap();
            for level in 2..=4 {
                ok(g.clone(), level);
            }
        }
    }

    #[test]
    fn glued_k5_tangle_count() {
        let r = ok(glued_k5(), 4);
        assert_eq!(r.tangle_count, Some((2, 2)));
    }

    #[test]
    fn cycle_is_a_triangle_chain() {
        let g = Arc::new(cycle(5));
        let td = decompose_to_level(&g, 3).unwrap();
        assert_eq!(td.len(), 3);
        assert!(td.nodes().iter().all(|n| n.class == TorsoClass::Complete(3)));
        assert_eq!(td.adhesion(), 2);
    }

    #[test]
    fn corrupted_bag_is_reported() {
        let g = Arc::new(glued_k5());
        let mut td = decompose(&g).unwrap();
        let t = td.nodes().iter().position(|n| n.bag.len() == 5).unwrap();
        let v = td.nodes()[t].bag.iter().copied().find(|&v| td.nodes().iter().filter(|n| n.bag.contains(v)).count() > 1).unwrap();
        let bag = td.nodes()[t].bag.without(v);
        td.nodes_mut()[t].bag = bag;
        let r = validate_decomposition(&g, &td, 4);
        assert!(r.violations.iter().any(|x| matches!(x, Violation::SubtreeBroken { .. } | Violation::EdgeUncovered(..))), "{:?}", r.violations);
    }

    #[test]
    fn wrong_level_is_reported() {
        let g = Arc::new(cube());
        let td = decompose_to_level(&g, 3).unwrap();
        let r = validate_decomposition(&g, &td, 4);
        assert!(r.violations.iter().any(|x| matches!(x, Violation::ClassNotAllowed { .. })));
    }
}
