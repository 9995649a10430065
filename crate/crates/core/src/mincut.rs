//! Vertex-capacitated augmenting-path flows and the separator searches
//! built on them.

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::separation::{is_degenerate_separator, Separation};

const INF: u32 = u32::MAX / 4;

/// Node-split flow network over a fixed graph. Vertex v becomes an arc
/// in(v) = 2v -> out(v) = 2v+1; graph edges become uncapacitated arcs
/// out(u) -> in(v) in both directions. Source and sink are implicit: the
/// search starts from in(w) for w in W and stops at out(x) for x in X.
pub struct FlowNetwork<'g> {
    g: &'g Graph,
    head: Vec<Vec<u32>>,
    to: Vec<u32>,
    base_cap: Vec<u32>,
    cap: Vec<u32>,
    stamp: Vec<u32>,
    round: u32,
    parent: Vec<u32>,
    queue: Vec<u32>,
    is_target: Vec<bool>,
}

impl<'g> FlowNetwork<'g> {
    pub fn new(g: &'g Graph) -> Self {
        let nodes = 2 * g.n();
        let mut head = vec![Vec::new(); nodes];
        let mut to = Vec::with_capacity(2 * g.n() + 4 * g.m());
        let mut cap = Vec::with_capacity(to.capacity());
        let mut add = |a: usize, b: usize, c: u32, head: &mut Vec<Vec<u32>>| {
            head[a].push(to.len() as u32);
            to.push(b as u32);
            cap.push(c);
            head[b].push(to.len() as u32);
            to.push(a as u32);
            cap.push(0);
        };
        for v in g.vertices() {
            add(2 * v, 2 * v + 1, 1, &mut head);
        }
        for (u, v) in g.edges() {
            add(2 * u + 1, 2 * v, INF, &mut head);
            add(2 * v + 1, 2 * u, INF, &mut head);
        }
        FlowNetwork {
            g,
            head,
            base_cap: cap.clone(),
            cap,
            to,
            stamp: vec![0; nodes],
            round: 0,
            parent: vec![u32::MAX; nodes],
            queue: Vec::with_capacity(nodes),
            is_target: vec![false; g.n()],
        }
    }

    fn next_round(&mut self) -> u32 {
        self.round = self.round.wrapping_add(1);
        if self.round == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.round = 1;
        }
        self.round
    }

    /// Breadth-first search in the residual network from in(W); returns the
    /// out-node of a reached target, if any.
    fn search(&mut self, w: &[Vertex]) -> Option<usize> {
        let r = self.next_round();
        self.queue.clear();
        for &v in w {
            let a = 2 * v;
            if self.stamp[a] != r {
                self.stamp[a] = r;
                self.parent[a] = u32::MAX;
                self.queue.push(a as u32);
            }
        }
        let mut qi = 0;
        while qi < self.queue.len() {
            let a = self.queue[qi] as usize;
            qi += 1;
            if a % 2 == 1 && self.is_target[a / 2] {
                return Some(a);
            }
            for &arc in &self.head[a] {
                let arc = arc as usize;
                if self.cap[arc] == 0 {
                    continue;
                }
                let b = self.to[arc] as usize;
                if self.stamp[b] != r {
                    self.stamp[b] = r;
                    self.parent[b] = arc as u32;
                    self.queue.push(b as u32);
                }
            }
        }
        None
    }

    fn augment(&mut self, end: usize) -> u32 {
        let mut bottleneck = INF;
        let mut b = end;
        while self.parent[b] != u32::MAX {
            let arc = self.parent[b] as usize;
            bottleneck = bottleneck.min(self.cap[arc]);
            b = self.to[arc ^ 1] as usize;
        }
        let mut b = end;
        while self.parent[b] != u32::MAX {
            let arc = self.parent[b] as usize;
            self.cap[arc] -= bottleneck;
            self.cap[arc ^ 1] += bottleneck;
            b = self.to[arc ^ 1] as usize;
        }
        bottleneck
    }

    /// Leftmost minimum (W,X)-separation where the vertices in `heavy` carry
    /// capacity `heavy_cap` instead of 1. Returns `None` once the flow
    /// exceeds `limit`.
    pub fn separate(
        &mut self,
        w: &[Vertex],
        x: &[Vertex],
        heavy: &[Vertex],
        heavy_cap: u32,
        limit: Option<usize>,
    ) -> Option<Separation> {
        self.cap.copy_from_slice(&self.base_cap);
        for &v in heavy {
            // The vertex arc of v is the first arc added at node in(v).
            let arc = self.head[2 * v][0] as usize;
            self.cap[arc] = heavy_cap;
        }
        for &v in x {
            self.is_target[v] = true;
        }
        let mut flow = 0usize;
        let result = loop {
            match self.search(w) {
                Some(end) => {
                    flow += self.augment(end) as usize;
                    if limit.is_some_and(|l| flow > l) {
                        break None;
                    }
                }
                None => break Some(()),
            }
        };
        for &v in x {
            self.is_target[v] = false;
        }
        result?;
        // Residual reachability from in(W) after the last failed search.
        let r = self.round;
        let n = self.g.n();
        let (mut y, mut s, mut z) = (Vec::new(), Vec::new(), Vec::new());
        for v in 0..n {
            let inn = self.stamp[2 * v] == r;
            let out = self.stamp[2 * v + 1] == r;
            if out {
                y.push(v);
            } else if inn {
                s.push(v);
            } else {
                z.push(v);
            }
        }
        debug_assert_eq!(s.len(), flow);
        Some(Separation::from_parts(
            VertexSet::from_sorted(y),
            VertexSet::from_sorted(s),
            VertexSet::from_sorted(z),
        ))
    }

    /// All leftmost minimum proper (W,X)-separations of order at most `k`.
    pub fn leftmost_proper(&mut self, w: &VertexSet, x: &VertexSet, k: usize) -> Vec<Separation> {
        let g = self.g;
        let heavy_cap = k as u32 + 1;
        let mut found = Vec::new();
        if w.len() > k && x.len() > k {
            // Every (W,X)-separation of order at most k is proper here.
            if let Some(sep) = self.separate(w, x, &[], heavy_cap, Some(k)) {
                found.push(sep);
            }
        } else {
            let ws: Vec<Option<Vertex>> =
                if w.len() > k { vec![None] } else { w.difference(x).iter().map(|&v| Some(v)).collect() };
            let xs: Vec<Option<Vertex>> =
                if x.len() > k { vec![None] } else { x.difference(w).iter().map(|&v| Some(v)).collect() };
            for &a in &ws {
                for &b in &xs {
                    if let (Some(a), Some(b)) = (a, b) {
                        if g.adjacent(a, b) {
                            continue;
                        }
                    }
                    let heavy: Vec<Vertex> = a.into_iter().chain(b).collect();
                    if let Some(sep) = self.separate(w, x, &heavy, heavy_cap, Some(k)) {
                        if sep.is_proper() {
                            found.push(sep);
                        }
                    }
                }
            }
        }
        let Some(best) = found.iter().map(Separation::order).min() else {
            return Vec::new();
        };
        found.retain(|s| s.order() == best);
        found.sort_by(|a, b| (a.y().len(), a.s()).cmp(&(b.y().len(), b.s())));
        found.dedup();
        let keep: Vec<bool> = found
            .iter()
            .map(|a| !found.iter().any(|b| b.y() != a.y() && b.y().is_subset(a.y())))
            .collect();
        let out: Vec<Separation> = found.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect();
        debug_assert!(out.len() <= k * k);
        out
    }
}

/// Leftmost minimum (W,X)-separation: minimum order, then the smallest Y.
pub fn min_wx_separation(g: &Graph, w: &VertexSet, x: &VertexSet) -> Separation {
    FlowNetwork::new(g).separate(w, x, &[], 1, None).expect("unbounded search always finishes")
}

/// All leftmost minimum proper (W,X)-separations of order at most `k`.
pub fn leftmost_min_proper_separations(g: &Graph, w: &VertexSet, x: &VertexSet, k: usize) -> Vec<Separation> {
    FlowNetwork::new(g).leftmost_proper(w, x, k)
}

/// A proper separation of order at most `j`, if one exists. Scans a fixed
/// set of j+1 anchor vertices against every non-neighbour: any separator of
/// size at most j misses an anchor, which then lies on one side.
pub fn small_separation(g: &Graph, j: usize) -> Option<Separation> {
    small_separation_in(&mut FlowNetwork::new(g), g, j)
}

fn small_separation_in(net: &mut FlowNetwork<'_>, g: &Graph, j: usize) -> Option<Separation> {
    let n = g.n();
    if j == 0 {
        let comps = g.components(&VertexSet::new());
        return (comps.len() > 1).then(|| Separation::from_sz(g, VertexSet::new(), comps[0].clone()));
    }
    for a in 0..(j + 1).min(n) {
        for x in 0..n {
            if x == a || g.adjacent(a, x) {
                continue;
            }
            if let Some(sep) = net.separate(&[a], &[x], &[a, x], j as u32 + 1, Some(j)) {
                return Some(sep);
            }
        }
    }
    None
}

/// |G| > k and no proper separation of order below k.
pub fn is_k_connected(g: &Graph, k: usize) -> bool {
    g.n() > k && (k == 0 || small_separation(g, k - 1).is_none())
}

pub(crate) fn require_k_connected(g: &Graph, k: usize) -> Result<()> {
    if g.n() <= k {
        return Err(Error::NotConnected { k, witness: Vec::new() });
    }
    match small_separation(g, k - 1) {
        Some(sep) => Err(Error::NotConnected { k, witness: sep.s().as_slice().to_vec() }),
        None => Ok(()),
    }
}

fn is_nondegenerate_3separator(g: &Graph, s: &VertexSet) -> bool {
    s.len() == 3 && g.components(s).len() >= 2 && !is_degenerate_separator(g, s)
}

/// A 3-separator admitting a non-degenerate separation, if any.
///
/// The pair scan only uses four anchor vertices: some anchor `a` avoids
/// the separator, and pairing `a` with every vertex in both orientations
/// covers a pair (y, z) with y in a component of size at least two and z
/// on the other side.
pub fn find_nondegenerate_3separator(g: &Graph) -> Result<Option<VertexSet>> {
    require_k_connected(g, 3)?;
    let n = g.n();
    // All components singletons: every outside vertex sees exactly S.
    let mut by_nbhd: std::collections::BTreeMap<&[Vertex], usize> = std::collections::BTreeMap::new();
    for v in g.vertices() {
        if g.degree(v) == 3 {
            *by_nbhd.entry(g.neighbors(v)).or_default() += 1;
        }
    }
    for (nb, count) in &by_nbhd {
        if *count == n - 3 && n >= 5 {
            let s = VertexSet::from_sorted(nb.to_vec());
            if n >= 6 || !g.is_independent(&s) {
                return Ok(Some(s));
            }
        }
    }
    let mut net = FlowNetwork::new(g);
    for a in 0..4.min(n) {
        for x in 0..n {
            if x == a || g.adjacent(a, x) {
                continue;
            }
            for (y, z) in [(a, x), (x, a)] {
                if let Some(s) = nondegenerate_from_pair(&mut net, g, y, z) {
                    return Ok(Some(s));
                }
            }
        }
    }
    Ok(None)
}

fn nondegenerate_from_pair(net: &mut FlowNetwork<'_>, g: &Graph, y: Vertex, z: Vertex) -> Option<VertexSet> {
    let zs = VertexSet::singleton(z);
    for sep in net.leftmost_proper(&VertexSet::singleton(y), &zs, 3) {
        if is_nondegenerate_3separator(g, sep.s()) {
            return Some(sep.s().clone());
        }
    }
    if g.degree(y) == 3 {
        let ny = VertexSet::from_sorted(g.neighbors(y).to_vec());
        if g.is_independent(&ny) && !ny.contains(z) {
            for sep in net.leftmost_proper(&ny, &zs, 3) {
                if is_nondegenerate_3separator(g, sep.s()) {
                    return Some(sep.s().clone());
                }
            }
        }
    }
    None
}
