//! Quasi-4-connectivity, exceptional graphs, quasi-4-connected regions and
//! the region of an order-4 tangle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;

use crate::defined::{nd_minimals_and_crossedges, nd_structure_exhaustive, NdStructure};
use crate::embedding::find_embedding;
use crate::error::{Error, Result};
use crate::generators;
use crate::graph::{Graph, Vertex, VertexMap, VertexSet};
use crate::mincut::{require_k_connected, small_separation, FlowNetwork};
use crate::minor::{contraction_model, MinorModel};
use crate::separation::{check_cap, enumerate_separations, small_subsets, Separation};
use crate::tangle::{is_matching, Provenance, Tangle};

/// A proper separation of order 3 with both sides of size at least 2 around
/// `s`, if the components allow one.
fn balanced_split(g: &Graph, s: &VertexSet, mut comps: Vec<VertexSet>) -> Option<Separation> {
    if comps.len() < 2 {
        return None;
    }
    let total: usize = comps.iter().map(|c| c.len()).sum();
    comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let y = if comps.len() == 2 {
        if comps[1].len() < 2 {
            return None;
        }
        comps[0].clone()
    } else if total < 4 {
        return None;
    } else if comps[0].len() >= 2 {
        comps[0].clone()
    } else {
        comps[0].union(&comps[1])
    };
    let z = g.vertex_set().difference(s).difference(&y);
    Some(Separation::from_parts(y, s.clone(), z))
}

fn greedy_matching(g: &Graph, want: usize) -> Vec<(Vertex, Vertex)> {
    let mut used = vec![false; g.n()];
    let mut out = Vec::new();
    for (a, b) in g.edges() {
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            out.push((a, b));
            if out.len() == want {
                break;
            }
        }
    }
    out
}

/// A witness that `g` is not quasi-4-connected: a proper separation of
/// order at most 2, or one of order 3 with both sides of size at least 2.
/// Graphs on at most three vertices get their trivial separation.
///
/// Order 3 is checked with four disjoint anchor edges: a bad separator
/// misses one of them, and the leftmost minimum separation of that edge
/// from a far vertex has the largest possible far side.
pub fn quasi4_obstruction(g: &Graph) -> Option<Separation> {
    if g.n() <= 3 {
        return Some(Separation::trivial(g));
    }
    if let Some(sep) = small_separation(g, 2) {
        return Some(sep);
    }
    let anchors = greedy_matching(g, 4);
    if anchors.len() < 4 {
        return small_subsets(g.n(), 4)
            .filter(|s| s.len() == 3)
            .find_map(|s| balanced_split(g, &s, g.components(&s)));
    }
    let mut net = FlowNetwork::new(g);
    for &(y, y2) in &anchors {
        for z in g.vertices() {
            if z == y || z == y2 || g.adjacent(z, y) || g.adjacent(z, y2) {
                continue;
            }
            if let Some(sep) = net.separate(&[y, y2], &[z], &[y, y2, z], 4, Some(3)) {
                if sep.z().len() >= 2 {
                    return Some(sep);
                }
            }
        }
    }
    None
}

/// 3-connected, and every separation of order 3 has a side of size at most 1.
pub fn is_quasi_4_connected(g: &Graph) -> bool {
    quasi4_obstruction(g).is_none()
}

/// The same property by brute force over all vertex sets of size at most 3.
pub fn is_quasi_4_connected_exhaustive(g: &Graph) -> bool {
    if g.n() <= 3 {
        return false;
    }
    small_subsets(g.n(), 4).all(|s| {
        let comps = g.components(&s);
        if s.len() < 3 {
            comps.len() < 2
        } else {
            balanced_split(g, &s, comps).is_none()
        }
    })
}

fn embeds_in_exceptional(g: &Graph) -> bool {
    g.n() <= 7 && (find_embedding(g, &generators::th3()).is_some() || find_embedding(g, &generators::tr3()).is_some())
}

/// Quasi-4-connected and isomorphic to a subgraph of TH+3 or TR+3.
pub fn is_exceptional(g: &Graph) -> Result<bool> {
    if !is_quasi_4_connected(g) {
        return Err(Error::precondition("exceptionality is only defined for quasi-4-connected graphs"));
    }
    Ok(embeds_in_exceptional(g))
}

/// The unique order-4 tangle {(Y,S,Z) : |Y| < |Z|} of a non-exceptional
/// quasi-4-connected graph, or `None` for an exceptional one.
pub fn canonical_q4_tangle(g: &Arc<Graph>) -> Result<Option<Tangle>> {
    if is_exceptional(g)? {
        return Ok(None);
    }
    Ok(Some(Tangle::small_side_unchecked(g.clone())))
}

/// `k` paths from `v` to distinct vertices of `targets`, disjoint apart
/// from `v`, through vertices marked in `allowed`. Targets only end paths.
fn fan(g: &Graph, allowed: &[bool], v: Vertex, targets: &VertexSet, k: usize) -> Option<Vec<Vec<Vertex>>> {
    let n = g.n();
    let sink = 2 * n;
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    let (mut to, mut cap): (Vec<usize>, Vec<i32>) = (Vec::new(), Vec::new());
    let mut add = |a: usize, b: usize, c: i32, head: &mut Vec<Vec<usize>>| {
        head[a].push(to.len());
        to.push(b);
        cap.push(c);
        head[b].push(to.len());
        to.push(a);
        cap.push(0);
    };
    for x in 0..n {
        if !allowed[x] || x == v {
            continue;
        }
        if targets.contains(x) {
            add(2 * x, sink, 1, &mut head);
        } else {
            add(2 * x, 2 * x + 1, 1, &mut head);
        }
    }
    for (a, b) in g.edges() {
        if allowed[a] && allowed[b] {
            add(2 * a + 1, 2 * b, 1, &mut head);
            add(2 * b + 1, 2 * a, 1, &mut head);
        }
    }
    let original = cap.clone();
    let start = 2 * v + 1;
    for _ in 0..k {
        let mut parent = vec![usize::MAX; 2 * n + 1];
        let mut seen = vec![false; 2 * n + 1];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            if a == sink {
                break;
            }
            for &arc in &head[a] {
                let b = to[arc];
                if cap[arc] > 0 && !seen[b] {
                    seen[b] = true;
                    parent[b] = arc;
                    queue.push_back(b);
                }
            }
        }
        if !seen[sink] {
            return None;
        }
        let mut b = sink;
        while b != start {
            let arc = parent[b];
            cap[arc] -= 1;
            cap[arc ^ 1] += 1;
            b = to[arc ^ 1];
        }
    }
    let mut flow: Vec<i32> = original.iter().zip(&cap).map(|(o, c)| o - c).collect();
    let mut paths = Vec::new();
    for _ in 0..k {
        let mut path = vec![v];
        let mut a = start;
        while a != sink {
            let arc = *head[a].iter().find(|&&arc| arc % 2 == 0 && flow[arc] > 0)?;
            flow[arc] -= 1;
            a = to[arc];
            if a.is_multiple_of(2) && a != sink {
                path.push(a / 2);
            }
        }
        paths.push(path);
    }
    Some(paths)
}

/// Shortest path from `sources` to `targets` through `allowed` vertices;
/// only its first vertex is a source and only its last is a target.
fn bfs_path(g: &Graph, allowed: &[bool], sources: &[Vertex], targets: &[bool]) -> Option<Vec<Vertex>> {
    let mut parent = vec![usize::MAX; g.n()];
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(a) = queue.pop_front() {
        for &b in g.neighbors(a) {
            if seen[b] || !allowed[b] {
                continue;
            }
            seen[b] = true;
            parent[b] = a;
            if targets[b] {
                let mut path = vec![b];
                let mut c = b;
                while parent[c] != usize::MAX {
                    c = parent[c];
                    path.push(c);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(b);
        }
    }
    None
}

fn construction_failed(what: &str) -> Error {
    Error::invariant("torso-model-construction", what.to_string())
}

static DEGENERATE_REQUESTS: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);

/// How often, process-wide, a branch-set construction was reached with a
/// degenerate separation. Public callers are turned away before that point.
pub fn degenerate_construction_requests() -> usize {
    DEGENERATE_REQUESTS.load(std::sync::atomic::Ordering::Relaxed)
}

/// Vertex sets `parts[i] ⊆ Y` such that the sets {s_i} ∪ parts[i] are
/// disjoint, connected and pairwise adjacent. `y` is the union of
/// components of G∖S that all see the whole of `s`, and |Y| ≥ 2 or S spans
/// an edge. G must be 3-connected. `flip` picks the other end of every
/// arbitrary choice.
fn separator_parts(g: &Graph, y: &VertexSet, s: &VertexSet, flip: bool) -> Result<[VertexSet; 3]> {
    let sv = [s[0], s[1], s[2]];
    let mut removed = vec![true; g.n()];
    for &v in y {
        removed[v] = false;
    }
    let mut comps = g.components_masked(&removed);
    if flip {
        comps.reverse();
    }
    let mut parts: [VertexSet; 3] = Default::default();
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    if let Some(&(_, _, k)) = pairs.iter().find(|&&(i, j, _)| g.adjacent(sv[i], sv[j])) {
        // The edge joins two of them; one component reaches the third to both.
        parts[k] = comps[0].clone();
        return Ok(parts);
    }
    if comps.len() >= 2 {
        parts[0] = comps[0].clone();
        parts[2] = comps[1].clone();
        return Ok(parts);
    }
    if y.len() < 2 {
        DEGENERATE_REQUESTS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        return Err(Error::precondition("independent separator with a single vertex behind it"));
    }
    let mut allowed = vec![false; g.n()];
    for &v in y.iter().chain(s.iter()) {
        allowed[v] = true;
    }
    let v = if flip { y[y.len() - 1] } else { y[0] };
    let mut paths = fan(g, &allowed, v, s, 3).ok_or_else(|| construction_failed("no fan into the separator"))?;
    paths.sort_by_key(|p| sv.iter().position(|&x| x == *p.last().unwrap()));
    if paths.iter().all(|p| p.len() == 2) {
        let w = *g
            .neighbors(v)
            .iter()
            .find(|&&u| y.contains(u))
            .ok_or_else(|| construction_failed("isolated fan centre"))?;
        let mut no_v = allowed.clone();
        no_v[v] = false;
        let mut is_s = vec![false; g.n()];
        for &x in &sv {
            is_s[x] = true;
        }
        let q = bfs_path(g, &no_v, &[w], &is_s).ok_or_else(|| construction_failed("no detour path"))?;
        let i = sv.iter().position(|&x| x == *q.last().unwrap()).unwrap();
        paths[i] = std::iter::once(v).chain(q).collect();
    }
    let a = (0..3).find(|&i| paths[i].len() >= 3).unwrap();
    let (mut b, mut c) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut allowed2 = vec![false; g.n()];
    for &u in y {
        allowed2[u] = true;
    }
    allowed2[sv[b]] = true;
    allowed2[sv[c]] = true;
    allowed2[v] = false;
    let mut target = vec![false; g.n()];
    for &u in paths[b].iter().chain(&paths[c]) {
        target[u] = u != v;
    }
    let interior: Vec<Vertex> = paths[a][1..paths[a].len() - 1].to_vec();
    let q = bfs_path(g, &allowed2, &interior, &target).ok_or_else(|| construction_failed("no connector path"))?;
    let (w1, w2) = (q[0], *q.last().unwrap());
    if !paths[b].contains(&w2) {
        std::mem::swap(&mut b, &mut c);
    }
    let i1 = paths[a].iter().position(|&u| u == w1).unwrap();
    let i2 = paths[b].iter().position(|&u| u == w2).unwrap();
    let ma: VertexSet = paths[a][i1..].iter().chain(&q[..q.len() - 1]).copied().collect();
    let mb: VertexSet = paths[b][i2..].iter().copied().collect();
    let mc: VertexSet = paths[c].iter().chain(&paths[a][..i1]).chain(&paths[b][..i2]).copied().collect();
    parts[a] = ma.without(sv[a]);
    parts[b] = mb.without(sv[b]);
    parts[c] = mc.without(sv[c]);
    Ok(parts)
}

fn faithful_model_from_parts(
    g: &Arc<Graph>,
    pattern: Graph,
    map: &VertexMap,
    parts: &BTreeMap<Vertex, VertexSet>,
) -> Result<MinorModel> {
    let mut branch = Vec::with_capacity(pattern.n());
    let mut anchors = Vec::with_capacity(pattern.n());
    for i in 0..pattern.n() {
        let h = map.to_host(i);
        anchors.push(h);
        branch.push(parts.get(&h).map_or_else(|| VertexSet::singleton(h), |p| p.with(h)));
    }
    MinorModel::new(g.clone(), Arc::new(pattern), branch, Some(anchors))
        .map_err(|e| Error::invariant("torso-model-construction", e.to_string()))
}

/// A faithful model of torso(G, S ∪ Z) in a 3-connected G, for a proper
/// non-degenerate separation (Y,S,Z) of order 3. Pattern vertices are the
/// vertices of S ∪ Z in ascending order.
pub fn faithful_torso_model(g: &Arc<Graph>, sep: &Separation) -> Result<MinorModel> {
    sep.validate(g)?;
    if sep.order() != 3 || !sep.is_proper() {
        return Err(Error::precondition("torso models need a proper separation of order 3"));
    }
    if sep.is_degenerate(g)? {
        return Err(Error::precondition(format!("{sep:?} is degenerate; its torso is not a faithful minor")));
    }
    for c in g.components(&sep.sz()) {
        if g.neighborhood(&c) != *sep.s() {
            return Err(Error::precondition(format!("component {c:?} does not see the whole separator")));
        }
    }
    let parts = separator_parts(g, sep.y(), sep.s(), false)?;
    let (torso, map) = g.torso(&sep.sz());
    let parts: BTreeMap<Vertex, VertexSet> = sep.s().iter().copied().zip(parts).collect();
    faithful_model_from_parts(g, torso, &map, &parts)
}

/// Why a vertex set is not a quasi-4-connected region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionViolation {
    /// A component outside the region without exactly three neighbours in it.
    Attachment { component: VertexSet, neighbours: VertexSet },
    /// The torso is not quasi-4-connected; the separation is in host ids.
    TorsoNotQuasi4 { separation: Separation },
    /// These torso edges cannot be realised by branch sets outside the region.
    NotFaithful { pairs: Vec<(Vertex, Vertex)> },
}

impl fmt::Display for RegionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionViolation::Attachment { component, neighbours } => {
                write!(f, "component {component:?} has neighbours {neighbours:?} in the region")
            }
            RegionViolation::TorsoNotQuasi4 { separation } => {
                write!(f, "torso separation {separation:?} has two large sides")
            }
            RegionViolation::NotFaithful { pairs } => write!(f, "torso edges {pairs:?} cannot be realised"),
        }
    }
}

/// A vertex set whose torso is quasi-4-connected and a faithful minor of G
/// and whose outside components have three neighbours each.
#[derive(Clone, Debug)]
pub struct Region {
    graph: Arc<Graph>,
    r: VertexSet,
    torso: Arc<Graph>,
    map: VertexMap,
    model: Arc<MinorModel>,
    exceptional: bool,
}

impl Region {
    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.r
    }

    pub fn torso(&self) -> &Arc<Graph> {
        &self.torso
    }

    /// Torso vertex `i` is host vertex `map().to_host(i)`.
    pub fn map(&self) -> &VertexMap {
        &self.map
    }

    pub fn witness_model(&self) -> &Arc<MinorModel> {
        &self.model
    }

    pub fn has_exceptional_torso(&self) -> bool {
        self.exceptional
    }
}

#[derive(Default)]
struct Realization {
    parts: BTreeMap<Vertex, VertexSet>,
    realized: BTreeSet<(Vertex, Vertex)>,
    missing: Vec<(Vertex, Vertex)>,
}

fn triple_pairs(s: &VertexSet) -> [(Vertex, Vertex); 3] {
    [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])]
}

/// Branch-set additions outside R that join the pairs of every component
/// neighbourhood in `comps`. Groups of components sharing a neighbourhood
/// realise all three pairs unless the group is one vertex; such a vertex
/// joins one of its neighbours and realises two pairs, and the pairs
/// nothing else realises are distributed by a capacity-2 matching.
fn realize_pairs(g: &Graph, r: &VertexSet, comps: &[VertexSet], flip: bool) -> Result<Realization> {
    let mut groups: BTreeMap<VertexSet, Vec<&VertexSet>> = BTreeMap::new();
    for c in comps {
        groups.entry(g.neighborhood(c)).or_default().push(c);
    }
    let mut out = Realization::default();
    let add = |parts: &mut BTreeMap<Vertex, VertexSet>, s: Vertex, p: &VertexSet| {
        let e = parts.entry(s).or_default();
        *e = e.union(p);
    };
    let mut singles: Vec<(VertexSet, Vertex)> = Vec::new();
    for (nb, members) in &groups {
        if nb.len() != 3 {
            return Err(Error::precondition(format!("component neighbourhood {nb:?} is not a triple")));
        }
        let y = members.iter().fold(VertexSet::new(), |acc, c| acc.union(c));
        if y.len() == 1 {
            singles.push((nb.clone(), y[0]));
            continue;
        }
        if r.len() <= 3 {
            return Err(Error::precondition("region too small for a torso model"));
        }
        let parts = separator_parts(g, &y, nb, flip)?;
        for (i, p) in parts.iter().enumerate() {
            add(&mut out.parts, nb[i], p);
        }
        out.realized.extend(triple_pairs(nb));
    }
    if flip {
        singles.reverse();
    }
    let mut needy: Vec<(Vertex, Vertex)> = singles
        .iter()
        .flat_map(|(nb, _)| triple_pairs(nb))
        .filter(|&(a, b)| !g.adjacent(a, b) && !out.realized.contains(&(a, b)))
        .collect();
    needy.sort();
    needy.dedup();
    // slot 2i and 2i+1 belong to single i
    let mut slot_owner: Vec<Option<usize>> = vec![None; 2 * singles.len()];
    let covers: Vec<Vec<usize>> = needy
        .iter()
        .map(|p| (0..singles.len()).filter(|&i| triple_pairs(&singles[i].0).contains(p)).collect())
        .collect();
    fn augment(p: usize, covers: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &i in &covers[p] {
            for slot in [2 * i, 2 * i + 1] {
                if seen[slot] {
                    continue;
                }
                seen[slot] = true;
                if owner[slot].is_none_or(|q| augment(q, covers, owner, seen)) {
                    owner[slot] = Some(p);
                    return true;
                }
            }
        }
        false
    }
    for p in 0..needy.len() {
        let mut seen = vec![false; slot_owner.len()];
        if !augment(p, &covers, &mut slot_owner, &mut seen) {
            out.missing.push(needy[p]);
        }
    }
    for (i, (nb, c)) in singles.iter().enumerate() {
        let assigned: Vec<(Vertex, Vertex)> =
            [slot_owner[2 * i], slot_owner[2 * i + 1]].iter().flatten().map(|&p| needy[p]).collect();
        let dropped = triple_pairs(nb).into_iter().find(|p| !assigned.contains(p)).unwrap();
        let centre = nb.iter().copied().find(|&x| x != dropped.0 && x != dropped.1).unwrap();
        add(&mut out.parts, centre, &VertexSet::singleton(*c));
        for &x in nb.iter().filter(|&&x| x != centre) {
            out.realized.insert((centre.min(x), centre.max(x)));
        }
    }
    Ok(out)
}

fn region_model(g: &Arc<Graph>, r: &VertexSet, flip: bool) -> Result<std::result::Result<MinorModel, RegionViolation>> {
    let comps = g.components(r);
    let real = realize_pairs(g, r, &comps, flip)?;
    if !real.missing.is_empty() {
        return Ok(Err(RegionViolation::NotFaithful { pairs: real.missing }));
    }
    let (torso, map) = g.torso(r);
    Ok(Ok(faithful_model_from_parts(g, torso, &map, &real.parts)?))
}

/// Validates R as a quasi-4-connected region of a 3-connected G and builds
/// its witness model.
pub fn check_region(g: &Arc<Graph>, r: &VertexSet) -> Result<Region> {
    require_k_connected(g, 3)?;
    check_region_in_triconnected(g, r)
}

/// [`check_region`] without re-checking that G is 3-connected.
pub(crate) fn check_region_in_triconnected(g: &Arc<Graph>, r: &VertexSet) -> Result<Region> {
    g.check_set(r)?;
    for c in g.components(r) {
        let nb = g.neighborhood(&c);
        if nb.len() != 3 {
            return Err(Error::Region(RegionViolation::Attachment { component: c, neighbours: nb }));
        }
    }
    let (torso, map) = g.torso(r);
    if let Some(sep) = quasi4_obstruction(&torso) {
        let host = Separation::from_parts(map.set_to_host(sep.y()), map.set_to_host(sep.s()), map.set_to_host(sep.z()));
        return Err(Error::Region(RegionViolation::TorsoNotQuasi4 { separation: host }));
    }
    let model = region_model(g, r, false)?.map_err(Error::Region)?;
    let exceptional = embeds_in_exceptional(&torso);
    Ok(Region { graph: g.clone(), r: r.clone(), torso: Arc::new(torso), map, model: Arc::new(model), exceptional })
}

/// A second witness model of the torso built with every arbitrary choice
/// flipped. Can coincide with the first.
pub fn alternative_witness(region: &Region) -> Result<MinorModel> {
    region_model(&region.graph, &region.r, true)?.map_err(Error::Region)
}

/// A non-exceptional quasi-4-connected faithful minor Ĥ of G containing
/// the region, with one vertex from each of some outside components.
#[derive(Clone, Debug)]
pub struct Extension {
    pub graph: Arc<Graph>,
    /// Ĥ vertex `i` is host vertex `map.to_host(i)`.
    pub map: VertexMap,
    pub model: Arc<MinorModel>,
    /// The added vertices, in host ids.
    pub extension_vertices: VertexSet,
}

const COMPONENT_CHOICES_PER_TRIPLE_SET: usize = 64;

fn try_extension(g: &Arc<Graph>, r: &VertexSet, comps: &[VertexSet], chosen: &[usize]) -> Result<Option<Extension>> {
    let rest: Vec<VertexSet> =
        comps.iter().enumerate().filter(|(i, _)| !chosen.contains(i)).map(|(_, c)| c.clone()).collect();
    let real = realize_pairs(g, r, &rest, false)?;
    let zs: VertexSet = chosen.iter().map(|&i| comps[i][0]).collect();
    let vhat = r.union(&zs);
    let map = VertexMap::restriction(g.n(), &vhat);
    let mut edges: Vec<(Vertex, Vertex)> =
        g.edges().filter(|&(a, b)| r.contains(a) && r.contains(b)).chain(real.realized.iter().copied()).collect();
    for &i in chosen {
        let z = comps[i][0];
        edges.extend(g.neighborhood(&comps[i]).iter().map(|&x| (z, x)));
    }
    let ext = Graph::new(vhat.len(), edges.iter().map(|&(a, b)| (map.from_host(a).unwrap(), map.from_host(b).unwrap())))?;
    if !is_quasi_4_connected(&ext) || embeds_in_exceptional(&ext) {
        return Ok(None);
    }
    let mut parts = real.parts;
    for &i in chosen {
        parts.insert(comps[i][0], comps[i].without(comps[i][0]));
    }
    let model = faithful_model_from_parts(g, ext.clone(), &map, &parts)?;
    Ok(Some(Extension { graph: Arc::new(ext), map, model: Arc::new(model), extension_vertices: zs }))
}

/// Non-exceptional extensions with the fewest extension vertices, each
/// outside component contracted onto its smallest vertex. Candidates are
/// tried by sets of distinct neighbourhood triples in lexicographic order,
/// then by component choice; at most `limit` are returned.
pub fn extensions(region: &Region, limit: usize) -> Result<Vec<Extension>> {
    if !region.exceptional {
        return Err(Error::precondition("extensions are only searched for regions with exceptional torso"));
    }
    let g = &region.graph;
    let r = &region.r;
    let comps = g.components(r);
    let mut groups: BTreeMap<VertexSet, Vec<usize>> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        groups.entry(g.neighborhood(c)).or_default().push(i);
    }
    let triples: Vec<&Vec<usize>> = groups.values().collect();
    let mut out = Vec::new();
    for j in 1..=8usize.saturating_sub(r.len()).min(triples.len()) {
        for combo in (0..triples.len()).combinations(j) {
            let choices = combo.iter().map(|&t| triples[t].iter().copied()).multi_cartesian_product();
            for chosen in choices.take(COMPONENT_CHOICES_PER_TRIPLE_SET) {
                if let Some(ext) = try_extension(g, r, &comps, &chosen)? {
                    out.push(ext);
                    if out.len() >= limit {
                        return Ok(out);
                    }
                }
            }
        }
        if !out.is_empty() {
            break;
        }
    }
    Ok(out)
}

pub fn non_exceptional_extension(region: &Region) -> Result<Option<Extension>> {
    Ok(extensions(region, 1)?.pop())
}

/// The tangle T_R: the small-side tangle of the torso, or of a
/// non-exceptional extension when the torso is exceptional, lifted to G.
pub fn tangle_of_region(region: &Region) -> Result<Tangle> {
    let (pattern, model) = if region.exceptional {
        let ext = non_exceptional_extension(region)?
            .ok_or_else(|| Error::precondition("region is exceptional: it has no non-exceptional extension"))?;
        (ext.graph, ext.model)
    } else {
        (region.torso.clone(), region.model.clone())
    };
    lift_small_side(pattern, model)
}

pub(crate) fn lift_small_side(pattern: Arc<Graph>, model: Arc<MinorModel>) -> Result<Tangle> {
    Ok(Tangle::lift(model, Tangle::small_side_unchecked(pattern))?.with_provenance(Provenance::Region))
}

/// Which endpoint of a crossedge survives its contraction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Survivor {
    #[default]
    LowerId,
    /// The endpoint in this set, else the lower id.
    Prefer(VertexSet),
}

impl Survivor {
    /// (survivor, removed)
    fn orient(&self, (a, b): (Vertex, Vertex)) -> (Vertex, Vertex) {
        let (lo, hi) = (a.min(b), a.max(b));
        match self {
            Survivor::Prefer(s) if s.contains(hi) && !s.contains(lo) => (hi, lo),
            _ => (lo, hi),
        }
    }
}

/// ⋂ Z ∪ ⋃ S over the non-degenerate minimal separations; V when there
/// are none.
fn initial_region(g: &Graph, nd: &NdStructure) -> VertexSet {
    let mut z = g.vertex_set();
    let mut s = VertexSet::new();
    for m in &nd.t_nd {
        z = z.intersection(m.z());
        s = s.union(m.s());
    }
    z.union(&s)
}

/// Separator vertices not on a crossedge, plus the Y-side ends of the
/// crossedges at S.
fn fence(nd: &NdStructure, i: usize) -> VertexSet {
    let mut f = nd.t_nd[i].s().clone();
    for c in &nd.crossedges {
        if c.first == i {
            f.remove(c.a);
            f.insert(c.b);
        } else if c.second == i {
            f.remove(c.b);
            f.insert(c.a);
        }
    }
    f
}

fn unordered(edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> BTreeSet<(Vertex, Vertex)> {
    edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect()
}

fn fail(check: &'static str, detail: impl Into<String>) -> Error {
    Error::invariant(check, detail)
}

/// One stage of contracting the non-degenerate crossedges of an order-4
/// tangle, with the tangle carried along in explicit form. Vertex ids in
/// `contracted`, `pending` and `region` are those of the original graph.
#[derive(Clone, Debug)]
pub struct PipelineState {
    stage: usize,
    original: Arc<Graph>,
    graph: Arc<Graph>,
    tangle: Tangle,
    /// G^(i) → G; `from_host` sends every original vertex to its image.
    rename: VertexMap,
    contracted: Vec<(Vertex, Vertex)>,
    pending: Vec<(Vertex, Vertex)>,
    region: VertexSet,
    nd0: NdStructure,
    h0_edges: BTreeSet<(Vertex, Vertex)>,
}

impl PipelineState {
    /// Stage 0 for an order-4 tangle of a 3-connected graph of oracle size.
    /// Checks that the outside components of R^(0) sit behind fences and
    /// that fences are cliques of its torso.
    pub fn new(t: &Tangle, survivor: &Survivor) -> Result<Self> {
        let g = t.graph().clone();
        check_cap(&g)?;
        require_k_connected(&g, 3)?;
        if t.order() != 4 {
            return Err(Error::precondition("the contraction pipeline needs an order-4 tangle"));
        }
        let tangle = t.materialize()?;
        let nd = nd_structure_exhaustive(&tangle)?;
        if t.defining_separation().is_some() {
            let flow = nd_minimals_and_crossedges(t)?;
            if flow.t_nd != nd.t_nd || flow.edges() != nd.edges() {
                return Err(fail("nd-flow-vs-exhaustive", format!("{:?} vs {:?}", flow.t_nd, nd.t_nd)));
            }
        }
        let r0 = initial_region(&g, &nd);
        let fences: Vec<VertexSet> = (0..nd.t_nd.len()).map(|i| fence(&nd, i)).collect();
        for c in g.components(&r0) {
            let nc = g.neighborhood(&c);
            let homes: Vec<usize> = (0..nd.t_nd.len())
                .filter(|&i| c.is_subset(&nd.t_nd[i].y().difference(&fences[i])) && nc == fences[i])
                .collect();
            if homes.len() != 1 {
                return Err(fail("outside-component-behind-fence", format!("{c:?} fits {homes:?}")));
            }
        }
        let (h0, h0map) = g.torso(&r0);
        for f in &fences {
            if !f.is_subset(&r0) || !h0.is_clique(&h0map.set_from_host(f)) {
                return Err(fail("fence-clique", format!("{f:?}")));
            }
        }
        let h0_edges = unordered(h0.edges().map(|(a, b)| (h0map.to_host(a), h0map.to_host(b))));
        let mut pending: Vec<(Vertex, Vertex)> = nd.edges().into_iter().map(|e| survivor.orient(e)).collect();
        pending.sort_by_key(|&(a, b)| (a.min(b), a.max(b)));
        Ok(PipelineState {
            stage: 0,
            rename: VertexMap::identity(g.n()),
            original: g.clone(),
            graph: g,
            tangle,
            contracted: Vec::new(),
            pending,
            region: r0,
            nd0: nd,
            h0_edges,
        })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn tangle(&self) -> &Tangle {
        &self.tangle
    }

    pub fn rename(&self) -> &VertexMap {
        &self.rename
    }

    pub fn contracted(&self) -> &[(Vertex, Vertex)] {
        &self.contracted
    }

    pub fn pending(&self) -> &[(Vertex, Vertex)] {
        &self.pending
    }

    pub fn region(&self) -> &VertexSet {
        &self.region
    }

    pub fn initial_structure(&self) -> &NdStructure {
        &self.nd0
    }

    fn current_crossedges(&self) -> Result<BTreeSet<(Vertex, Vertex)>> {
        let nd = nd_structure_exhaustive(&self.tangle)?;
        let edges = nd.edges();
        if !is_matching(&edges) {
            return Err(fail("crossedges-matching", format!("{edges:?}")));
        }
        Ok(unordered(edges.into_iter().map(|(a, b)| (self.rename.to_host(a), self.rename.to_host(b)))))
    }

    fn check_minimal_transfer(&self) -> Result<()> {
        let mut images = Vec::new();
        for m in &self.nd0.t_min {
            let s = self.rename.set_from_host(m.s());
            if m.is_proper() && self.graph.components(&s).len() > 1 {
                let y = self.rename.set_from_host(m.y()).difference(&s);
                let z = self.rename.set_from_host(m.z()).difference(&s);
                images.push(Separation::from_parts(y, s, z));
            }
        }
        images.sort();
        images.dedup();
        if images.is_empty() {
            images.push(Separation::trivial(&self.graph));
        }
        let actual = self.tangle.minimal_separations()?;
        if actual != images {
            return Err(fail("minimal-separations-transfer", format!("stage {}: {actual:?} vs {images:?}", self.stage)));
        }
        Ok(())
    }

    /// Contracts the crossedge `e` (original ids, either orientation) onto
    /// its survivor and checks the new stage.
    pub fn contract_crossedge_step(&self, e: (Vertex, Vertex)) -> Result<PipelineState> {
        let pos = self
            .pending
            .iter()
            .position(|&(a, b)| (a.min(b), a.max(b)) == (e.0.min(e.1), e.0.max(e.1)))
            .ok_or_else(|| Error::precondition(format!("{e:?} is not a pending crossedge")))?;
        let (keep, drop) = self.pending[pos];
        let current = self.current_crossedges()?;
        if current != unordered(self.pending.iter().copied()) {
            return Err(fail("crossedges-remaining", format!("stage {}: {current:?} vs {:?}", self.stage, self.pending)));
        }
        require_k_connected(&self.graph, 3).map_err(|e| fail("contraction-keeps-3-connectivity", e.to_string()))?;
        self.check_minimal_transfer()?;

        let gi = &self.graph;
        let s1 = self.rename.from_host(keep).unwrap();
        let s2 = self.rename.from_host(drop).unwrap();
        let (model, map) = contraction_model(gi.clone(), s1, s2)?;
        let gp = model.pattern().clone();
        require_k_connected(&gp, 3).map_err(|e| fail("contraction-keeps-3-connectivity", e.to_string()))?;
        let s1p = map.from_host(s1).unwrap();
        let pair = VertexSet::from([s1, s2]);
        let mut choices = BTreeMap::new();
        for sp in small_subsets(gp.n(), 4) {
            let comps = gp.components(&sp);
            if comps.len() < 2 {
                continue;
            }
            let z = if sp.contains(s1p) {
                let s = map.set_to_host(&sp).with(s2);
                let mut found: Option<VertexSet> = None;
                for sub in [s.without(s1), s.without(s2)] {
                    let meeting = gi.components(&sub).iter().filter(|c| !c.is_subset(&s)).count();
                    if meeting < 2 {
                        continue;
                    }
                    let zc = self.tangle.z_of(&sub)?.difference(&pair);
                    if found.as_ref().is_some_and(|f| *f != zc) {
                        return Err(fail("essential-subseparator-component", format!("{sp:?}")));
                    }
                    found = Some(zc);
                }
                let zc = found.ok_or_else(|| fail("essential-subseparator", format!("{sp:?}")))?;
                map.set_from_host(&zc)
            } else {
                map.set_from_host(&self.tangle.z_of(&map.set_to_host(&sp))?)
            };
            if !comps.contains(&z) {
                return Err(fail("contracted-choice-is-component", format!("{sp:?} -> {z:?}")));
            }
            choices.insert(sp, z);
        }
        let next = Tangle::from_choices(gp.clone(), 4, choices, Provenance::Contracted)?;
        for sep in enumerate_separations(gi, 4)? {
            if self.tangle.contains(&sep)? != next.contains(&model.project(&sep))? {
                return Err(fail("tangle-is-lifting-of-contraction", format!("{sep:?}")));
            }
        }

        let mut contracted = self.contracted.clone();
        contracted.push((keep, drop));
        let mut pending = self.pending.clone();
        pending.remove(pos);
        let state = PipelineState {
            stage: self.stage + 1,
            original: self.original.clone(),
            graph: gp,
            tangle: next,
            rename: self.rename.then(&map),
            contracted,
            pending,
            region: self.region.without(drop),
            nd0: self.nd0.clone(),
            h0_edges: self.h0_edges.clone(),
        };
        let after = state.current_crossedges()?;
        if after != unordered(state.pending.iter().copied()) {
            return Err(fail("crossedge-count-drops-by-one", format!("{after:?} vs {:?}", state.pending)));
        }
        state.check_torso_is_contraction()?;
        Ok(state)
    }

    fn check_torso_is_contraction(&self) -> Result<()> {
        let survivor: BTreeMap<Vertex, Vertex> = self.contracted.iter().map(|&(k, d)| (d, k)).collect();
        let f = |v: Vertex| *survivor.get(&v).unwrap_or(&v);
        let expected = unordered(self.h0_edges.iter().map(|&(a, b)| (f(a), f(b))).filter(|(a, b)| a != b));
        let (h, hmap) = self.original.torso(&self.region);
        let actual = unordered(h.edges().map(|(a, b)| (hmap.to_host(a), hmap.to_host(b))));
        if actual != expected {
            return Err(fail("torso-equals-contracted-torso", format!("stage {}", self.stage)));
        }
        Ok(())
    }

    /// Contracts all pending crossedges in order.
    pub fn run(self) -> Result<PipelineState> {
        let mut state = self;
        while let Some(&e) = state.pending.first() {
            state = state.contract_crossedge_step(e)?;
        }
        state.check_minimal_transfer()?;
        Ok(state)
    }

    /// Final-stage checks: the region is what the contracted tangle leaves
    /// outside its non-degenerate Y-sides, every proper small separation
    /// of its torso has a degenerate orientation, and each outside
    /// component attaches to an image of a non-degenerate separator.
    pub fn check_final(&self) -> Result<()> {
        if !self.pending.is_empty() {
            return Err(Error::precondition("pipeline has pending crossedges"));
        }
        let nd = nd_structure_exhaustive(&self.tangle)?;
        let covered = nd.t_nd.iter().fold(VertexSet::new(), |acc, m| acc.union(m.y()));
        let left = self.rename.set_to_host(&self.graph.vertex_set().difference(&covered));
        if left != self.region {
            return Err(fail("region-outside-y-sides", format!("{left:?} vs {:?}", self.region)));
        }
        // Each proper small separation of the torso has a side that, with S,
        // cuts off a degenerate minimal member of the contracted tangle.
        let (h, hmap) = self.original.torso(&self.region);
        if h.n() <= crate::separation::oracle_cap() {
            let all = self.graph.vertex_set();
            let lift = |side: &VertexSet, s: &VertexSet| {
                let side = self.rename.set_from_host(&hmap.set_to_host(side));
                let s = self.rename.set_from_host(&hmap.set_to_host(s));
                let rest = all.difference(&side).difference(&s);
                Separation::from_parts(side, s, rest)
            };
            for sep in enumerate_separations(&h, 4)? {
                if !sep.is_proper() {
                    continue;
                }
                let ok = [lift(sep.y(), sep.s()), lift(sep.z(), sep.s())]
                    .iter()
                    .any(|x| x.is_proper() && x.is_degenerate(&self.graph).unwrap_or(false) && nd.t_min.contains(x));
                if !ok {
                    return Err(fail("torso-separations-degenerate", format!("{sep:?}")));
                }
            }
        }
        let images: Vec<VertexSet> =
            self.nd0.t_nd.iter().map(|m| self.rename.set_to_host(&self.rename.set_from_host(m.s()))).collect();
        for c in self.original.components(&self.region) {
            let nc = self.original.neighborhood(&c);
            if !images.contains(&nc) {
                return Err(fail("outside-component-attachment", format!("{c:?} sees {nc:?}")));
            }
        }
        Ok(())
    }
}

/// R_T for an order-4 tangle of a 3-connected graph, contracting toward
/// the lower vertex id. At oracle size the whole contraction pipeline runs
/// with its checks.
pub fn region_of_tangle(t: &Tangle) -> Result<Region> {
    let audit = t.graph().n() <= crate::separation::oracle_cap().min(64);
    region_of_tangle_with(t, &Survivor::LowerId, audit)
}

/// R_T with a chosen crossedge orientation. Without `audit` R_T is read
/// off the minimal separations directly as R^(0) minus the removed
/// crossedge ends.
pub fn region_of_tangle_with(t: &Tangle, survivor: &Survivor, audit: bool) -> Result<Region> {
    let g = t.graph();
    if audit {
        let state = PipelineState::new(t, survivor)?.run()?;
        state.check_final()?;
        return check_region_in_triconnected(g, state.region());
    }
    require_k_connected(g, 3)?;
    region_of_tangle_unaudited(t, survivor)
}

pub(crate) fn region_of_tangle_unaudited(t: &Tangle, survivor: &Survivor) -> Result<Region> {
    let g = t.graph();
    if t.order() != 4 {
        return Err(Error::precondition("regions belong to order-4 tangles"));
    }
    let nd = if t.defining_separation().is_some() { nd_minimals_and_crossedges(t)? } else { nd_structure_exhaustive(t)? };
    let mut r = initial_region(g, &nd);
    for e in nd.edges() {
        r.remove(survivor.orient(e).1);
    }
    check_region_in_triconnected(g, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::*;
    use crate::oracle::enumerate_tangles;

    fn arc(g: Graph) -> Arc<Graph> {
        Arc::new(g)
    }

    #[test]
    fn quasi4_small_graphs() {
        for (g, want) in [
            (complete(4), true),
            (cube(), true),
            (glued_k5(), false),
            (complete(3), false),
            (cycle(6), false),
            (th3(), true),
            (tr3(), true),
            (th4(63).unwrap(), true),
            (truncated_cube(), false),
        ] {
            assert_eq!(is_quasi_4_connected(&g), want, "{g:?}");
            assert_eq!(is_quasi_4_connected_exhaustive(&g), want, "{g:?}");
        }
    }

    #[test]
    fn exceptional_graphs() {
        assert!(is_exceptional(&complete(4)).unwrap());
        assert!(is_exceptional(&th3()).unwrap());
        assert!(is_exceptional(&tr3()).unwrap());
        assert!(!is_exceptional(&cube()).unwrap());
        assert!(!is_exceptional(&complete(5)).unwrap());
        assert!(is_exceptional(&glued_k5()).is_err());
        assert!(canonical_q4_tangle(&arc(th3())).unwrap().is_none());
    }

    #[test]
    fn canonical_tangle_matches_oracle() {
        for g in [cube(), complete(5), th4(63).unwrap()] {
            let g = arc(g);
            let t = canonical_q4_tangle(&g).unwrap().unwrap();
            let oracle = enumerate_tangles(&g, 4).unwrap();
            assert_eq!(oracle.len(), 1);
            assert!(t.same_choices(&oracle[0]).unwrap());
        }
    }

    #[test]
    fn torso_model_shared_triangle() {
        let g = arc(glued_k5());
        let sep = Separation::new(&g, VertexSet::from([5, 6]), VertexSet::from([2, 3, 4]), VertexSet::from([0, 1])).unwrap();
        let m = faithful_torso_model(&g, &sep).unwrap();
        assert_eq!(m.pattern().n(), 5);
        assert!(m.pattern().is_complete());
        m.validate().unwrap();
    }

    #[test]
    fn torso_model_independent_separators() {
        // Each cube vertex sees an independent triple; the far side of a
        // triple plus its own vertex form a connected Y of size 4.
        let g = arc(cube());
        let s = VertexSet::from([1, 2, 4]);
        let y = VertexSet::from([3, 5, 6, 7]);
        let sep = Separation::new(&g, y.clone(), s.clone(), VertexSet::from([0])).unwrap();
        let m = faithful_torso_model(&g, &sep).unwrap();
        assert_eq!(m.pattern().m(), 6);
        let rev = Separation::new(&g, VertexSet::from([0]), s, y).unwrap();
        assert!(faithful_torso_model(&g, &rev).is_err());
        // two components behind an independent triple
        let g2 = arc(Graph::new(8, [(0, 3), (1, 3), (2, 3), (0, 4), (1, 4), (2, 4), (0, 5), (1, 5), (5, 6), (6, 2), (0, 7), (1, 7), (2, 7), (6, 7)]).unwrap());
        require_k_connected(&g2, 3).unwrap();
        let sep2 = Separation::new(&g2, VertexSet::from([3, 4]), VertexSet::from([0, 1, 2]), VertexSet::from([5, 6, 7])).unwrap();
        assert!(!g2.is_connected_subset(sep2.y()));
        faithful_torso_model(&g2, &sep2).unwrap();
    }

    #[test]
    fn th4_region_and_extension() {
        let g = arc(th4(63).unwrap());
        let r = VertexSet::from([0, 1, 2, 3]);
        let region = check_region(&g, &r).unwrap();
        assert!(region.torso().is_complete());
        assert!(region.has_exceptional_torso());
        let ext = non_exceptional_extension(&region).unwrap().unwrap();
        assert_eq!(ext.graph.n(), 8);
        let t = tangle_of_region(&region).unwrap();
        let oracle = enumerate_tangles(&g, 4).unwrap();
        assert!(t.same_choices(&oracle[0]).unwrap());
        let found = region_of_tangle(&oracle[0]).unwrap();
        assert_eq!(found.vertices(), &r);
    }

    #[test]
    fn glued_k5_regions() {
        let g = arc(glued_k5());
        let r = VertexSet::from([2, 3, 4, 5, 6]);
        let region = check_region(&g, &r).unwrap();
        assert!(!region.has_exceptional_torso());
        let t = tangle_of_region(&region).unwrap();
        let oracle = enumerate_tangles(&g, 4).unwrap();
        assert_eq!(oracle.len(), 2);
        assert_eq!(oracle.iter().filter(|o| o.same_choices(&t).unwrap()).count(), 1);
        for o in &oracle {
            let reg = region_of_tangle(o).unwrap();
            assert_eq!(reg.vertices().len(), 5);
            assert!(tangle_of_region(&reg).unwrap().same_choices(o).unwrap());
        }
    }

    #[test]
    fn region_violations() {
        let g = arc(glued_k5());
        let err = check_region(&g, &VertexSet::from([0, 1, 2, 3])).unwrap_err();
        assert!(matches!(err, Error::Region(RegionViolation::Attachment { .. })), "{err}");
        let g = arc(cube());
        let err = check_region(&g, &VertexSet::from([0, 1, 2, 3, 4, 5])).unwrap_err();
        assert!(matches!(err, Error::Region(_)), "{err}");
    }

    #[test]
    fn cube_region_is_everything() {
        let g = arc(cube());
        let t = &enumerate_tangles(&g, 4).unwrap()[0];
        let reg = region_of_tangle(t).unwrap();
        assert_eq!(reg.vertices().len(), 8);
        assert!(tangle_of_region(&reg).unwrap().same_choices(t).unwrap());
    }

    #[test]
    fn truncated_cube_pipeline() {
        let g = arc(truncated_cube());
        let oracle = enumerate_tangles(&g, 4).unwrap();
        assert_eq!(oracle.len(), 1);
        let state = PipelineState::new(&oracle[0], &Survivor::LowerId).unwrap();
        assert_eq!(state.pending().len(), 12);
        let one = state.contract_crossedge_step(state.pending()[0]).unwrap();
        assert_eq!(one.pending().len(), 11);
        let done = one.run().unwrap();
        done.check_final().unwrap();
        assert_eq!(done.region().len(), 12);
        let reg = check_region(&g, done.region()).unwrap();
        assert!(tangle_of_region(&reg).unwrap().same_choices(&oracle[0]).unwrap());
    }
}
