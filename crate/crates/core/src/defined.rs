//! Order-4 tangles built from a single order-3 separation, and their minimal
//! separations and crossedges computed by flows.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::mincut::{require_k_connected, FlowNetwork};
use crate::oracle::is_inseparable;
use crate::separation::Separation;
use crate::tangle::{classify_pair, is_matching, preceq_minimal, CrossClass, Tangle};

/// Smallest z ∈ Z such that every component of G∖(S∪{z}) has exactly three
/// neighbours.
pub fn has_split_vertex(g: &Graph, sep: &Separation) -> Result<Option<Vertex>> {
    if sep.order() != 3 {
        return Err(Error::precondition(format!("split vertices need order 3, got {}", sep.order())));
    }
    for &z in sep.z() {
        let cut = sep.s().with(z);
        if g.components(&cut).iter().all(|c| g.neighborhood(c).len() == 3) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// The tangle of all (Y,S,Z) of order below 4 with Z0 ⊆ Z or
/// |Z ∩ S0| > |Y ∩ S0|, after checking that it is one.
pub fn tangle_from_separation(g: &Arc<Graph>, s0: &Separation) -> Result<Tangle> {
    require_k_connected(g, 3)?;
    s0.validate(g)?;
    if s0.order() != 3 {
        return Err(Error::precondition(format!("defining separation has order {}", s0.order())));
    }
    if !s0.is_proper() {
        return Err(Error::precondition("defining separation is not proper"));
    }
    if s0.is_degenerate(g)? {
        return Err(Error::precondition(format!("defining separation {s0:?} is degenerate")));
    }
    if !g.is_connected_subset(s0.z()) {
        return Err(Error::precondition("Z-side of the defining separation is disconnected"));
    }
    if let Some(z) = has_split_vertex(g, s0)? {
        return Err(Error::precondition(format!("vertex {z} is a split vertex of {s0:?}")));
    }
    Ok(Tangle::defined_unchecked(g.clone(), s0.clone()))
}

/// The tangle of separations with X ⊆ S ∪ Z, for a (k−1)-inseparable X with
/// |X| > 3(k−1)/2.
pub fn tangle_from_inseparable_set(g: &Arc<Graph>, x: &VertexSet, k: usize) -> Result<Tangle> {
    if !(1..=4).contains(&k) {
        return Err(Error::precondition(format!("tangle order {k} outside 1..=4")));
    }
    g.check_set(x)?;
    if 2 * x.len() <= 3 * (k - 1) {
        return Err(Error::precondition(format!("|X| = {} is not above 3(k-1)/2 for k = {k}", x.len())));
    }
    if !is_inseparable(g, x, k - 1) {
        return Err(Error::precondition(format!("{x:?} is split by a separation of order at most {}", k - 1)));
    }
    Ok(Tangle::inseparable_unchecked(g.clone(), x.clone(), k))
}

/// A crossedge between two non-degenerate minimal separations, indexed
/// into [`NdStructure::t_nd`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Crossedge {
    /// Endpoint in the separator of `first`.
    pub a: Vertex,
    /// Endpoint in the separator of `second`.
    pub b: Vertex,
    pub first: usize,
    pub second: usize,
}

impl Crossedge {
    pub fn edge(&self) -> (Vertex, Vertex) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

#[derive(Clone, Debug, Default)]
pub struct NdStructure {
    /// ⪯-minimal members, sorted.
    pub t_min: Vec<Separation>,
    /// The non-degenerate ones among them, sorted.
    pub t_nd: Vec<Separation>,
    /// Crossedges of pairs in `t_nd`, sorted by edge.
    pub crossedges: Vec<Crossedge>,
}

impl NdStructure {
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.crossedges.iter().map(Crossedge::edge).collect()
    }

    fn from_minimals(g: &Graph, t_min: Vec<Separation>) -> Result<NdStructure> {
        let mut t_nd = Vec::new();
        for m in &t_min {
            if m.is_proper() && !m.is_degenerate(g)? {
                t_nd.push(m.clone());
            }
        }
        // Y-sides of distinct minimal separations are disjoint, so each
        // crossing pair shows up as a separator vertex inside another Y.
        let mut owner: Vec<Option<usize>> = vec![None; g.n()];
        for (i, m) in t_nd.iter().enumerate() {
            for &v in m.y() {
                if let Some(j) = owner[v] {
                    return Err(Error::invariant(
                        "minimal-y-disjoint",
                        format!("{:?} and {:?} share Y-vertex {v}", t_nd[j], m),
                    ));
                }
                owner[v] = Some(i);
            }
        }
        let mut crossedges = Vec::new();
        for (i, m) in t_nd.iter().enumerate() {
            for &s in m.s() {
                if let Some(j) = owner[s] {
                    if j > i {
                        continue;
                    }
                    match classify_pair(g, &t_nd[j], m)? {
                        CrossClass::Crossing(a, b) => crossedges.push(Crossedge { a, b, first: j, second: i }),
                        CrossClass::Orthogonal => {
                            return Err(Error::invariant("crossing-dichotomy", "separator meets a Y-side orthogonally"));
                        }
                    }
                }
            }
        }
        crossedges.sort_by_key(|c| (c.edge(), c.first, c.second));
        crossedges.dedup();
        let edges: Vec<_> = crossedges.iter().map(Crossedge::edge).collect();
        if !is_matching(&edges) {
            return Err(Error::invariant("crossedges-matching", format!("{edges:?}")));
        }
        Ok(NdStructure { t_min, t_nd, crossedges })
    }
}

/// Minimal separations, their non-degenerate part and its crossedges for
/// any order-4 tangle, by exhaustive canonical separations and pairwise
/// classification.
pub fn nd_structure_exhaustive(t: &Tangle) -> Result<NdStructure> {
    let g = t.graph();
    let t_min = t.minimal_separations()?;
    let s = NdStructure::from_minimals(g, t_min)?;
    let pairwise = crate::tangle::crossedges_pairwise(g, &s.t_nd)?;
    if pairwise != s.edges() {
        return Err(Error::invariant("crossedge-scan", format!("{pairwise:?} vs {:?}", s.edges())));
    }
    Ok(s)
}

/// The same for a tangle defined by (Y0,S0,Z0), by flows: minimal
/// separations not crossing S0 are reversed leftmost minimum proper
/// (S0,{x})-separations for x ∈ Z0; those crossing S0 through an edge sy
/// come from leftmost minimum proper (S0∖{s},{s})-separations in
/// G[S0 ∪ Z0].
pub fn nd_minimals_and_crossedges(t: &Tangle) -> Result<NdStructure> {
    let s0 = t
        .defining_separation()
        .ok_or_else(|| Error::precondition("tangle is not defined by a separation"))?
        .clone();
    let g = t.graph().as_ref();
    let mut separators: Vec<VertexSet> = vec![s0.s().clone()];
    let mut net = FlowNetwork::new(g);
    for &x in s0.z() {
        for sep in net.leftmost_proper(s0.s(), &VertexSet::singleton(x), 3) {
            if sep.order() == 3 {
                separators.push(sep.s().clone());
            }
        }
    }
    let inner_set = s0.sz();
    let (inner, map) = g.induced_subgraph(&inner_set);
    let mut inner_net = FlowNetwork::new(&inner);
    for &s in s0.s() {
        let mut towards: Vec<Vertex> = g.neighbors(s).iter().copied().filter(|&v| !s0.z().contains(v)).collect();
        if towards.len() != 1 || !s0.y().contains(towards[0]) {
            continue;
        }
        let y = towards.pop().unwrap();
        let w = map.set_from_host(&s0.s().without(s));
        let x = map.set_from_host(&VertexSet::singleton(s));
        for sep in inner_net.leftmost_proper(&w, &x, 2) {
            if sep.order() == 2 {
                separators.push(map.set_to_host(sep.s()).with(y));
            }
        }
    }
    separators.sort();
    separators.dedup();
    let mut canon = Vec::new();
    for s in separators {
        if g.components(&s).len() > 1 {
            canon.push(t.canonical(&s)?);
        }
    }
    let t_min = if canon.is_empty() { vec![Separation::trivial(g)] } else { preceq_minimal(canon) };
    NdStructure::from_minimals(g, t_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::oracle::enumerate_tangles;

    fn shared_triangle_sep(g: &Graph) -> Separation {
        Separation::new(g, [0, 1].into(), [2, 3, 4].into(), [5, 6].into()).unwrap()
    }

    #[test]
    fn glued_k5_defined_tangle() {
        let g = Arc::new(generators::glued_k5());
        let s0 = shared_triangle_sep(&g);
        let t = tangle_from_separation(&g, &s0).unwrap();
        assert!(t.contains(&s0).unwrap());
        let oracle = enumerate_tangles(&g, 4).unwrap();
        assert_eq!(oracle.iter().filter(|o| o.same_choices(&t).unwrap()).count(), 1);
        let nd = nd_minimals_and_crossedges(&t).unwrap();
        assert_eq!(nd.t_nd, vec![s0.clone()]);
        assert!(nd.crossedges.is_empty());
        let ex = nd_structure_exhaustive(&t).unwrap();
        assert_eq!(ex.t_min, nd.t_min);
    }

    #[test]
    fn split_vertex_cases() {
        let full = generators::th4(63).unwrap();
        let sep = Separation::from_sz(&full, [0, 1, 2].into(), (3..8).filter(|&v| v != 4).collect());
        assert_eq!(sep.y(), &VertexSet::from([4]));
        assert_eq!(has_split_vertex(&full, &sep).unwrap(), Some(3));
        let g = generators::glued_k5();
        assert_eq!(has_split_vertex(&g, &shared_triangle_sep(&g)).unwrap(), None);
        let g = Arc::new(full);
        let err = tangle_from_separation(&g, &sep).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn cube_has_no_eligible_separation() {
        let g = Arc::new(generators::cube());
        let sep = Separation::new(&g, [0].into(), [1, 2, 4].into(), [3, 5, 6, 7].into()).unwrap();
        assert!(tangle_from_separation(&g, &sep).is_err());
    }

    #[test]
    fn inseparable_set_tangles() {
        let k5 = Arc::new(generators::complete(5));
        let t = tangle_from_inseparable_set(&k5, &k5.vertex_set(), 4).unwrap();
        let o = enumerate_tangles(&k5, 4).unwrap();
        assert!(o[0].same_choices(&t).unwrap());
        let k4 = Arc::new(generators::complete(4));
        assert!(tangle_from_inseparable_set(&k4, &k4.vertex_set(), 4).is_err());
        let g = Arc::new(generators::glued_k5());
        let t2 = tangle_from_inseparable_set(&g, &[2, 3, 4, 5, 6].into(), 4).unwrap();
        assert_eq!(enumerate_tangles(&g, 4).unwrap().iter().filter(|o| o.same_choices(&t2).unwrap()).count(), 1);
    }

    #[test]
    fn truncated_cube_crossedges_form_a_matching() {
        let g = Arc::new(generators::truncated_cube());
        // The corner triangle {0,1,2} against the rest.
        let tri: VertexSet = [0, 1, 2].into();
        let s = g.neighborhood(&tri);
        let s0 = Separation::from_sz(&g, s.clone(), g.vertex_set().difference(&tri).difference(&s));
        let t = tangle_from_separation(&g, &s0).unwrap();
        let nd = nd_minimals_and_crossedges(&t).unwrap();
        assert_eq!(nd.t_nd.len(), 8);
        assert!(nd.t_nd.iter().all(|m| m.y().len() == 3));
        let mut expected: Vec<(Vertex, Vertex)> = (0..8)
            .flat_map(|v| (0..3).map(move |d| (3 * v + d, 3 * (v ^ (1 << d)) + d)))
            .filter(|(a, b)| a < b)
            .collect();
        expected.sort();
        assert_eq!(nd.edges(), expected);
        let ex = nd_structure_exhaustive(&t).unwrap();
        assert_eq!(ex.t_min, nd.t_min);
        assert_eq!(ex.edges(), nd.edges());
    }
}
