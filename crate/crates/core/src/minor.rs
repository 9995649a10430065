//! Minor models: branch sets in a host graph, one per pattern vertex.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::separation::Separation;

#[derive(Clone, Debug)]
pub struct MinorModel {
    host: Arc<Graph>,
    pattern: Arc<Graph>,
    branch: Vec<VertexSet>,
    /// Host edge realising each pattern edge, in `pattern.edges()` order.
    witness: Vec<(Vertex, Vertex)>,
    /// For faithful models: the host vertex each pattern vertex stands for.
    anchors: Option<Vec<Vertex>>,
}

impl MinorModel {
    /// Builds a model from branch sets, locating an edge witness for every
    /// pattern edge, and validates it.
    pub fn new(
        host: Arc<Graph>,
        pattern: Arc<Graph>,
        branch: Vec<VertexSet>,
        anchors: Option<Vec<Vertex>>,
    ) -> Result<Self> {
        if branch.len() != pattern.n() {
            return Err(Error::InvalidModel(format!(
                "{} branch sets for {} pattern vertices",
                branch.len(),
                pattern.n()
            )));
        }
        let owner = owners(&host, &branch)?;
        let mut between: HashMap<(Vertex, Vertex), (Vertex, Vertex)> = HashMap::new();
        for (x, y) in host.edges() {
            if let (Some(a), Some(b)) = (owner[x], owner[y]) {
                if a != b {
                    between.entry((a.min(b), a.max(b))).or_insert(if a < b { (x, y) } else { (y, x) });
                }
            }
        }
        let mut witness = Vec::with_capacity(pattern.m());
        for (a, b) in pattern.edges() {
            match between.get(&(a, b)) {
                Some(&e) => witness.push(e),
                None => {
                    return Err(Error::InvalidModel(format!("pattern edge {a}-{b} has no host edge")));
                }
            }
        }
        let model = MinorModel { host, pattern, branch, witness, anchors };
        model.validate()?;
        Ok(model)
    }

    pub fn identity(g: Arc<Graph>) -> Self {
        let branch = g.vertices().map(VertexSet::singleton).collect();
        let witness = g.edges().collect();
        let anchors = Some(g.vertices().collect());
        MinorModel { host: g.clone(), pattern: g, branch, witness, anchors }
    }

    pub fn host(&self) -> &Arc<Graph> {
        &self.host
    }

    pub fn pattern(&self) -> &Arc<Graph> {
        &self.pattern
    }

    pub fn branch_set(&self, w: Vertex) -> &VertexSet {
        &self.branch[w]
    }

    pub fn branch_sets(&self) -> &[VertexSet] {
        &self.branch
    }

    pub fn edge_witnesses(&self) -> impl Iterator<Item = ((Vertex, Vertex), (Vertex, Vertex))> + '_ {
        self.pattern.edges().zip(self.witness.iter().copied())
    }

    pub fn is_faithful(&self) -> bool {
        self.anchors.is_some()
    }

    pub fn anchor(&self, w: Vertex) -> Option<Vertex> {
        self.anchors.as_ref().map(|a| a[w])
    }

    /// Disjoint connected branch sets, realised edges, anchors inside their
    /// own branch sets.
    pub fn validate(&self) -> Result<()> {
        let owner = owners(&self.host, &self.branch)?;
        for (w, b) in self.branch.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidModel(format!("branch set of {w} is empty")));
            }
            if !self.host.is_connected_subset(b) {
                return Err(Error::InvalidModel(format!("branch set of {w} is disconnected")));
            }
        }
        if self.witness.len() != self.pattern.m() {
            return Err(Error::InvalidModel("edge witness count mismatch".into()));
        }
        for ((a, b), (x, y)) in self.edge_witnesses() {
            if !self.host.adjacent(x, y) {
                return Err(Error::InvalidModel(format!("witness {x}-{y} is not a host edge")));
            }
            let ok = (owner[x] == Some(a) && owner[y] == Some(b)) || (owner[x] == Some(b) && owner[y] == Some(a));
            if !ok {
                return Err(Error::InvalidModel(format!("witness {x}-{y} does not join branch sets {a},{b}")));
            }
        }
        if let Some(anchors) = &self.anchors {
            if anchors.len() != self.pattern.n() {
                return Err(Error::InvalidModel("anchor count mismatch".into()));
            }
            for (w, &h) in anchors.iter().enumerate() {
                if !self.branch[w].contains(h) {
                    return Err(Error::InvalidModel(format!("pattern vertex {w} not in its own branch set")));
                }
            }
        }
        Ok(())
    }

    /// Image of a host separation on the pattern: Y' = {w : M_w ⊆ Y},
    /// S' = {w : M_w meets S}, Z' = {w : M_w ⊆ Z}.
    pub fn project(&self, sep: &Separation) -> Separation {
        let n = self.host.n();
        let mut side = vec![0u8; n];
        for &v in sep.s() {
            side[v] = 1;
        }
        for &v in sep.z() {
            side[v] = 2;
        }
        let (mut y, mut s, mut z) = (Vec::new(), Vec::new(), Vec::new());
        for (w, b) in self.branch.iter().enumerate() {
            if b.iter().any(|&v| side[v] == 1) {
                s.push(w);
            } else if b.iter().all(|&v| side[v] == 0) {
                y.push(w);
            } else if b.iter().all(|&v| side[v] == 2) {
                z.push(w);
            } else {
                // A connected branch set avoiding S cannot meet both Y and Z.
                unreachable!("branch set {w} straddles a separation");
            }
        }
        Separation::from_parts(VertexSet::from_sorted(y), VertexSet::from_sorted(s), VertexSet::from_sorted(z))
    }

    /// `outer` models H in G and `inner` models K in H; returns K in G.
    pub fn compose(outer: &MinorModel, inner: &MinorModel) -> Result<MinorModel> {
        if outer.pattern.as_ref() != inner.host.as_ref() {
            return Err(Error::InvalidModel("composed models do not chain".into()));
        }
        let branch = inner
            .branch
            .iter()
            .map(|b| b.iter().fold(VertexSet::new(), |acc, &h| acc.union(&outer.branch[h])))
            .collect();
        let anchors = match (&outer.anchors, &inner.anchors) {
            (Some(o), Some(i)) => Some(i.iter().map(|&h| o[h]).collect()),
            _ => None,
        };
        MinorModel::new(outer.host.clone(), inner.pattern.clone(), branch, anchors)
    }
}

fn owners(host: &Graph, branch: &[VertexSet]) -> Result<Vec<Option<Vertex>>> {
    let mut owner = vec![None; host.n()];
    for (w, b) in branch.iter().enumerate() {
        host.check_set(b)?;
        for &v in b {
            if owner[v].is_some() {
                return Err(Error::InvalidModel(format!("host vertex {v} in two branch sets")));
            }
            owner[v] = Some(w);
        }
    }
    Ok(owner)
}

/// Model of the contraction of s1s2 (onto s1) inside the original graph.
pub fn contraction_model(g: Arc<Graph>, s1: Vertex, s2: Vertex) -> Result<(MinorModel, crate::graph::VertexMap)> {
    let (h, map) = g.contract_edge(s1, s2)?;
    let branch = (0..h.n())
        .map(|v| {
            let hv = map.to_host(v);
            if hv == s1 {
                VertexSet::from([s1, s2])
            } else {
                VertexSet::singleton(hv)
            }
        })
        .collect();
    let anchors = Some((0..h.n()).map(|v| map.to_host(v)).collect());
    Ok((MinorModel::new(g, Arc::new(h), branch, anchors)?, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn identity_projects_to_itself() {
        let g = Arc::new(generators::cube());
        let m = MinorModel::identity(g.clone());
        m.validate().unwrap();
        let sep = Separation::new(&g, [0].into(), [1, 2, 4].into(), [3, 5, 6, 7].into()).unwrap();
        assert_eq!(m.project(&sep), sep);
    }

    #[test]
    fn contraction_projection_moves_s1_into_s() {
        let g = Arc::new(generators::cube());
        let (m, map) = contraction_model(g.clone(), 0, 1).unwrap();
        // s2 = 1 in S, s1 = 0 in Z.
        let sep = Separation::new(&g, [3].into(), [1, 2, 7].into(), [0, 4, 5, 6].into()).unwrap();
        let p = m.project(&sep);
        assert!(p.s().contains(map.from_host(0).unwrap()));
        assert!(p.order() <= sep.order());
    }

    #[test]
    fn rejects_overlapping_and_disconnected_sets() {
        let g = Arc::new(generators::path(3));
        let k2 = Arc::new(generators::complete(2));
        assert!(MinorModel::new(g.clone(), k2.clone(), vec![[0, 1].into(), [1, 2].into()], None).is_err());
        assert!(MinorModel::new(g.clone(), k2.clone(), vec![[0, 2].into(), [1].into()], None).is_err());
        assert!(MinorModel::new(g.clone(), k2.clone(), vec![[0].into(), [2].into()], None).is_err());
        let ok = MinorModel::new(g, k2, vec![[0, 1].into(), [2].into()], Some(vec![0, 2])).unwrap();
        assert!(ok.is_faithful());
    }

    #[test]
    fn composition_of_contractions() {
        let g = Arc::new(generators::cube());
        let (m1, map1) = contraction_model(g.clone(), 0, 1).unwrap();
        let h = m1.pattern().clone();
        let a = map1.from_host(2).unwrap();
        let b = map1.from_host(3).unwrap();
        let (m2, _) = contraction_model(h, a, b).unwrap();
        let m = MinorModel::compose(&m1, &m2).unwrap();
        assert_eq!(m.pattern().n(), 6);
        assert!(m.is_faithful());
    }
}
