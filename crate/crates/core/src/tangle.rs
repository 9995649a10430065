//! Tangles of order at most 4 in component-choice form: for every S with
//! |S| < k the tangle picks one component C(S) of G∖S, and (Y,S,Z) is a
//! member iff C(S) ⊆ Z.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexMap, VertexSet};
use crate::minor::MinorModel;
use crate::separation::{check_cap, enumerate_separations, small_subsets, Separation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Oracle,
    Defined,
    Lifted,
    Region,
    InseparableSet,
    /// The small-side tangle of a non-exceptional quasi-4-connected graph.
    SmallSide,
    Contracted,
    Torso,
}

#[derive(Clone, Debug)]
enum Rule {
    /// Z-side for every separating S.
    Explicit(Arc<BTreeMap<VertexSet, VertexSet>>),
    /// Z0 ⊆ Z or |Z ∩ S0| > |Y ∩ S0|.
    Defined(Separation),
    /// |Y| < |Z|.
    SmallSide,
    /// X ⊆ S ∪ Z.
    Inseparable(VertexSet),
    /// Membership of the projection to the pattern of `model`.
    Lifted { model: Arc<MinorModel>, inner: Arc<Tangle> },
    /// Restriction of a host tangle to a torso; `map` sends torso vertices
    /// to host vertices.
    Torso { map: VertexMap, outer: Arc<Tangle> },
}

#[derive(Clone, Debug)]
pub struct Tangle {
    graph: Arc<Graph>,
    order: usize,
    rule: Rule,
    provenance: Provenance,
}

/// Relation between two distinct minimal separations of an order-4 tangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossClass {
    Orthogonal,
    /// The crossedge, first endpoint in the first separator.
    Crossing(Vertex, Vertex),
}

impl Tangle {
    fn build(graph: Arc<Graph>, order: usize, rule: Rule, provenance: Provenance) -> Result<Self> {
        if order > 4 {
            return Err(Error::precondition(format!("tangles of order {order} are not supported")));
        }
        Ok(Tangle { graph, order, rule, provenance })
    }

    /// A choice function given explicitly on separating sets. Entries for
    /// non-separating sets are ignored. Not checked against the axioms.
    pub fn from_choices(
        graph: Arc<Graph>,
        order: usize,
        choices: BTreeMap<VertexSet, VertexSet>,
        provenance: Provenance,
    ) -> Result<Self> {
        let choices = choices.into_iter().filter(|(s, _)| graph.components(s).len() > 1).collect();
        Tangle::build(graph, order, Rule::Explicit(Arc::new(choices)), provenance)
    }

    /// The separations (Y,S,Z) of order below 4 with Z0 ⊆ Z or
    /// |Z ∩ S0| > |Y ∩ S0|. No preconditions are checked.
    pub(crate) fn defined_unchecked(graph: Arc<Graph>, s0: Separation) -> Self {
        Tangle { graph, order: 4, rule: Rule::Defined(s0), provenance: Provenance::Defined }
    }

    /// The separations (Y,S,Z) with |Y| < |Z|. No preconditions are checked.
    pub(crate) fn small_side_unchecked(graph: Arc<Graph>) -> Self {
        Tangle { graph, order: 4, rule: Rule::SmallSide, provenance: Provenance::SmallSide }
    }

    /// The separations of order below k with X ⊆ S ∪ Z. No preconditions are
    /// checked.
    pub(crate) fn inseparable_unchecked(graph: Arc<Graph>, x: VertexSet, order: usize) -> Self {
        Tangle { graph, order, rule: Rule::Inseparable(x), provenance: Provenance::InseparableSet }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// (Y0,S0,Z0) for a tangle built from a separation.
    pub fn defining_separation(&self) -> Option<&Separation> {
        match &self.rule {
            Rule::Defined(s0) => Some(s0),
            _ => None,
        }
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    fn check_order(&self, s: &VertexSet) -> Result<()> {
        if s.len() >= self.order {
            return Err(Error::OrderTooHigh { order: s.len(), bound: self.order });
        }
        Ok(())
    }

    /// The defining predicate of the tangle, evaluated directly on `sep`.
    /// Agrees with [`Tangle::contains`] whenever the tangle is genuine.
    pub fn satisfies_rule(&self, sep: &Separation) -> Result<bool> {
        self.check_order(sep.s())?;
        Ok(match &self.rule {
            Rule::Explicit(_) => self.z_of(sep.s())?.is_subset(sep.z()),
            Rule::Defined(s0) => s0.z().is_subset(sep.z()) || sep.z().intersection_len(s0.s()) > sep.y().intersection_len(s0.s()),
            Rule::SmallSide => sep.y().len() < sep.z().len(),
            Rule::Inseparable(x) => x.is_subset(&sep.sz()),
            Rule::Lifted { model, inner } => inner.contains(&model.project(sep))?,
            Rule::Torso { map, outer } => outer.contains(&torso_extension(outer.graph(), map, sep))?,
        })
    }

    /// Z-side of the chosen component for S.
    pub fn z_of(&self, s: &VertexSet) -> Result<VertexSet> {
        self.check_order(s)?;
        self.graph.check_set(s)?;
        let mut comps = self.graph.components(s);
        match comps.len() {
            0 => return Err(Error::invariant("tangle-nonempty-side", format!("G∖{s:?} is empty"))),
            1 => return Ok(comps.pop().unwrap()),
            _ => {}
        }
        match &self.rule {
            Rule::Explicit(map) => map
                .get(s)
                .cloned()
                .ok_or_else(|| Error::invariant("choice-defined", format!("no component chosen for {s:?}"))),
            Rule::Torso { map, outer } => {
                let host_z = outer.z_of(&map.set_to_host(s))?;
                let z = map.set_from_host(&host_z);
                if z.is_empty() {
                    return Err(Error::invariant("torso-side-meets-region", format!("{s:?}")));
                }
                Ok(z)
            }
            _ => {
                let mut hit = None;
                for c in comps {
                    let sep = Separation::from_sz(&self.graph, s.clone(), c);
                    if self.satisfies_rule(&sep)? {
                        if hit.is_some() {
                            return Err(Error::invariant("choice-unique", format!("two components chosen for {s:?}")));
                        }
                        hit = Some(sep.z().clone());
                    }
                }
                hit.ok_or_else(|| Error::invariant("choice-unique", format!("no component chosen for {s:?}")))
            }
        }
    }

    pub fn y_of(&self, s: &VertexSet) -> Result<VertexSet> {
        let z = self.z_of(s)?;
        Ok(self.graph.vertex_set().difference(s).difference(&z))
    }

    /// (Y(S), S, Z(S)).
    pub fn canonical(&self, s: &VertexSet) -> Result<Separation> {
        let z = self.z_of(s)?;
        Ok(Separation::from_sz(&self.graph, s.clone(), z))
    }

    pub fn contains(&self, sep: &Separation) -> Result<bool> {
        Ok(self.z_of(sep.s())?.is_subset(sep.z()))
    }

    /// Restriction to separations of order below `kp`.
    pub fn truncate(&self, kp: usize) -> Result<Tangle> {
        if kp > self.order {
            return Err(Error::precondition(format!("cannot truncate order {} to {kp}", self.order)));
        }
        let rule = match &self.rule {
            Rule::Explicit(map) => Rule::Explicit(Arc::new(
                map.iter().filter(|(s, _)| s.len() < kp).map(|(s, z)| (s.clone(), z.clone())).collect(),
            )),
            r => r.clone(),
        };
        Ok(Tangle { graph: self.graph.clone(), order: kp, rule, provenance: self.provenance })
    }

    /// The lifting to the host of `model`: (Y,S,Z) is a member iff its
    /// projection is a member of `inner`.
    pub fn lift(model: Arc<MinorModel>, inner: Tangle) -> Result<Tangle> {
        if model.pattern().as_ref() != inner.graph.as_ref() {
            return Err(Error::precondition("tangle does not live on the pattern of the model"));
        }
        let order = inner.order;
        Ok(Tangle {
            graph: model.host().clone(),
            order,
            rule: Rule::Lifted { model, inner: Arc::new(inner) },
            provenance: Provenance::Lifted,
        })
    }

    /// Explicit choice function over every separating S with |S| < k.
    pub fn materialize(&self) -> Result<Tangle> {
        check_cap(&self.graph)?;
        let mut map = BTreeMap::new();
        for s in small_subsets(self.graph.n(), self.order) {
            if self.graph.components(&s).len() > 1 {
                let z = self.z_of(&s)?;
                map.insert(s, z);
            }
        }
        Ok(Tangle {
            graph: self.graph.clone(),
            order: self.order,
            rule: Rule::Explicit(Arc::new(map)),
            provenance: self.provenance,
        })
    }

    /// Chosen Z-sides of all separating S, in the order of `small_subsets`.
    pub fn choice_vector(&self) -> Result<Vec<(VertexSet, VertexSet)>> {
        check_cap(&self.graph)?;
        let mut out = Vec::new();
        for s in small_subsets(self.graph.n(), self.order) {
            if self.graph.components(&s).len() > 1 {
                let z = self.z_of(&s)?;
                out.push((s, z));
            }
        }
        Ok(out)
    }

    /// Same graph, same order and the same choice for every S.
    pub fn same_choices(&self, other: &Tangle) -> Result<bool> {
        if self.order != other.order || self.graph.as_ref() != other.graph.as_ref() {
            return Ok(false);
        }
        Ok(self.choice_vector()? == other.choice_vector()?)
    }

    /// Membership equality over every separation of order below k, each
    /// side evaluated through its defining predicate.
    pub fn agrees_on_all_separations(&self, other: &Tangle) -> Result<bool> {
        if self.order != other.order || self.graph.as_ref() != other.graph.as_ref() {
            return Ok(false);
        }
        for sep in enumerate_separations(&self.graph, self.order)? {
            if self.satisfies_rule(&sep)? != other.satisfies_rule(&sep)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Canonical separations of all separating S with |S| < k. Exhaustive,
    /// so only for small graphs.
    pub fn canonical_separations(&self) -> Result<Vec<Separation>> {
        Ok(self
            .choice_vector()?
            .into_iter()
            .map(|(s, z)| Separation::from_sz(&self.graph, s, z))
            .collect())
    }

    /// The ⪯-minimal members, found by filtering canonical separations.
    pub fn minimal_separations(&self) -> Result<Vec<Separation>> {
        let canon = self.canonical_separations()?;
        if canon.is_empty() {
            return Ok(vec![Separation::trivial(&self.graph)]);
        }
        Ok(preceq_minimal(canon))
    }

    /// ⋂ (S ∪ Z(S)) over all S with |S| < k.
    pub fn core_set(&self) -> Result<VertexSet> {
        let mut x = self.graph.vertex_set();
        for (s, z) in self.choice_vector()? {
            x = x.intersection(&s.union(&z));
        }
        Ok(x)
    }
}

/// Members not strictly above another member under ⪯, sorted and deduplicated.
pub fn preceq_minimal(mut seps: Vec<Separation>) -> Vec<Separation> {
    seps.sort();
    seps.dedup();
    seps.sort_by_key(|s| s.sz().len());
    let mut out: Vec<Separation> = Vec::new();
    for (i, a) in seps.iter().enumerate() {
        let dominated = seps[..i].iter().chain(&seps[i + 1..]).any(|b| b.strictly_precedes(a));
        if !dominated {
            out.push(a.clone());
        }
    }
    out.sort();
    out
}

/// Host separation whose restriction to the torso is `sep`: each outside
/// component joins the side its (clique) neighbourhood touches.
fn torso_extension(host: &Graph, map: &VertexMap, sep: &Separation) -> Separation {
    let region: VertexSet = (0..map.derived_len()).map(|v| map.to_host(v)).collect();
    let mut y = map.set_to_host(sep.y());
    let s = map.set_to_host(sep.s());
    let mut z = map.set_to_host(sep.z());
    for c in host.components(&region) {
        let nc = host.neighborhood(&c);
        if nc.is_subset(&y.union(&s)) {
            y = y.union(&c);
        } else {
            z = z.union(&c);
        }
    }
    Separation::from_parts(y, s, z)
}

/// The tangle induced on torso(G, R) by an order-4 tangle whose truncation
/// to order 3 is T³(R) for a triconnected region R.
pub fn torso_tangle(g: &Arc<Graph>, r: &VertexSet, t: &Tangle) -> Result<(Tangle, VertexMap)> {
    if t.order() != 4 || t.graph().as_ref() != g.as_ref() {
        return Err(Error::precondition("torso tangle needs an order-4 tangle of the same graph"));
    }
    g.check_set(r)?;
    let (torso, map) = g.torso(r);
    if !crate::mincut::is_k_connected(&torso, 3) {
        return Err(Error::precondition(format!("torso of {r:?} is not 3-connected")));
    }
    for c in g.components(r) {
        let nc = g.neighborhood(&c);
        if nc.len() > 2 {
            return Err(Error::precondition(format!("component {c:?} has {} neighbours in the region", nc.len())));
        }
    }
    let t3 = t.truncate(3)?;
    let tr = Tangle::inseparable_unchecked(g.clone(), r.clone(), 3);
    if !t3.same_choices(&tr)? {
        return Err(Error::precondition("order-3 truncation does not point at the region"));
    }
    let torso = Arc::new(torso);
    let tt = Tangle {
        graph: torso,
        order: 4,
        rule: Rule::Torso { map: map.clone(), outer: Arc::new(t.clone()) },
        provenance: Provenance::Torso,
    };
    Ok((tt, map))
}

/// Orthogonal if (Y1∪S1) ∩ (Y2∪S2) ⊆ S1 ∩ S2; otherwise the pair must cross
/// through a single edge, which is returned.
pub fn classify_pair(g: &Graph, a: &Separation, b: &Separation) -> Result<CrossClass> {
    let common = a.ys().intersection(&b.ys());
    if common.is_subset(&a.s().intersection(b.s())) {
        return Ok(CrossClass::Orthogonal);
    }
    let fail = |why: &str| Err(Error::invariant("crossing-dichotomy", format!("{a:?} vs {b:?}: {why}")));
    if !a.y().is_disjoint(b.y()) {
        return fail("Y-sides meet");
    }
    if !a.s().is_disjoint(b.s()) {
        return fail("separators meet");
    }
    let sa = a.s().intersection(b.y());
    let sb = b.s().intersection(a.y());
    if sa.len() != 1 || sb.len() != 1 {
        return fail("separator does not meet the other Y-side in one vertex");
    }
    let (s1, s2) = (sa[0], sb[0]);
    if !g.adjacent(s1, s2) {
        return fail("no crossedge");
    }
    Ok(CrossClass::Crossing(s1, s2))
}

/// Crossedges of all crossing pairs among `seps`, by full pairwise
/// classification.
pub fn crossedges_pairwise(g: &Graph, seps: &[Separation]) -> Result<Vec<(Vertex, Vertex)>> {
    let mut out = Vec::new();
    for i in 0..seps.len() {
        for j in i + 1..seps.len() {
            if let CrossClass::Crossing(a, b) = classify_pair(g, &seps[i], &seps[j])? {
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Whether a set of edges shares no endpoint.
pub fn is_matching(edges: &[(Vertex, Vertex)]) -> bool {
    let mut seen = std::collections::HashSet::new();
    edges.iter().all(|&(a, b)| seen.insert(a) && seen.insert(b))
}
