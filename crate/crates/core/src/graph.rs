//! Simple undirected graphs with dense vertex ids, plus the vertex-set
//! algebra used everywhere else.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// A set of vertices kept sorted and duplicate free.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn singleton(v: Vertex) -> Self {
        VertexSet(vec![v])
    }

    /// Caller guarantees `v` is strictly increasing.
    pub(crate) fn from_sorted(v: Vec<Vertex>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        VertexSet(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn first(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        match self.0.binary_search(&v) {
            Ok(i) => {
                self.0.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, v: Vertex) -> Self {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    pub fn without(&self, v: Vertex) -> Self {
        let mut s = self.clone();
        s.remove(v);
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        VertexSet(out)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        VertexSet(out)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::new();
        let mut j = 0;
        for &x in a {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            if j >= b.len() || b[j] != x {
                out.push(x);
            }
        }
        VertexSet(out)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        let b = &other.0;
        let mut j = 0;
        for &x in &self.0 {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            if j >= b.len() || b[j] != x {
                return false;
            }
            j += 1;
        }
        true
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut c) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    }

    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn to_bits(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &v| acc | (1u64 << v))
    }

    pub fn from_bits(bits: u64) -> Self {
        VertexSet((0..64).filter(|i| bits >> i & 1 == 1).collect())
    }
}

impl Deref for VertexSet {
    type Target = [Vertex];
    fn deref(&self) -> &[Vertex] {
        &self.0
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        let mut v: Vec<Vertex> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl From<Vec<Vertex>> for VertexSet {
    fn from(v: Vec<Vertex>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[Vertex; N]> for VertexSet {
    fn from(v: [Vertex; N]) -> Self {
        v.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a Vertex;
    type IntoIter = std::slice::Iter<'a, Vertex>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// Translation between a derived graph (torso, induced subgraph,
/// contraction) and the graph it was derived from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMap {
    to_host: Vec<Vertex>,
    from_host: Vec<Option<Vertex>>,
}

impl VertexMap {
    pub fn identity(n: usize) -> Self {
        VertexMap { to_host: (0..n).collect(), from_host: (0..n).map(Some).collect() }
    }

    pub(crate) fn from_parts(to_host: Vec<Vertex>, from_host: Vec<Option<Vertex>>) -> Self {
        VertexMap { to_host, from_host }
    }

    /// Map from a sorted host subset: derived vertex `i` is `keep[i]`.
    pub fn restriction(host_n: usize, keep: &VertexSet) -> Self {
        let mut from_host = vec![None; host_n];
        for (i, &v) in keep.iter().enumerate() {
            from_host[v] = Some(i);
        }
        VertexMap { to_host: keep.as_slice().to_vec(), from_host }
    }

    pub fn to_host(&self, v: Vertex) -> Vertex {
        self.to_host[v]
    }

    pub fn from_host(&self, v: Vertex) -> Option<Vertex> {
        self.from_host[v]
    }

    pub fn derived_len(&self) -> usize {
        self.to_host.len()
    }

    pub fn host_len(&self) -> usize {
        self.from_host.len()
    }

    pub fn set_to_host(&self, s: &VertexSet) -> VertexSet {
        s.iter().map(|&v| self.to_host[v]).collect()
    }

    /// Image of a host set in the derived graph, dropping vertices that
    /// have no image.
    pub fn set_from_host(&self, s: &VertexSet) -> VertexSet {
        s.iter().filter_map(|&v| self.from_host[v]).collect()
    }

    /// `self` maps D1 -> H, `inner` maps D2 -> D1; the result maps D2 -> H.
    pub fn then(&self, inner: &VertexMap) -> VertexMap {
        let to_host = inner.to_host.iter().map(|&v| self.to_host[v]).collect();
        let from_host = self.from_host.iter().map(|o| o.and_then(|v| inner.from_host[v])).collect();
        VertexMap { to_host, from_host }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
    m: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n(), self.edges().collect::<Vec<_>>())
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Graph> {
        Self::with_duplicates(n, edges).map(|(g, _)| g)
    }

    /// Builds a graph and reports how many duplicate edges were dropped.
    pub fn with_duplicates(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<(Graph, usize)> {
        let mut adj = vec![Vec::new(); n];
        let mut raw = 0usize;
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
            raw += 1;
        }
        let mut m2 = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            m2 += list.len();
        }
        let m = m2 / 2;
        Ok((Graph { adj, m }, raw - m))
    }

    pub fn empty(n: usize) -> Graph {
        Graph { adj: vec![Vec::new(); n], m: 0 }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n()
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::from_sorted(self.vertices().collect())
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    pub fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.last() {
            Some(&v) => self.check_vertex(v),
            None => Ok(()),
        }
    }

    /// N(W): neighbours of W outside W.
    pub fn neighborhood(&self, w: &VertexSet) -> VertexSet {
        let inside = w.to_mask(self.n());
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for &v in w {
            for &u in &self.adj[v] {
                if !inside[u] && !seen[u] {
                    seen[u] = true;
                    out.push(u);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Connected components of G minus `removed`, ordered by smallest vertex.
    pub fn components(&self, removed: &VertexSet) -> Vec<VertexSet> {
        self.components_masked(&removed.to_mask(self.n()))
    }

    pub(crate) fn components_masked(&self, removed: &[bool]) -> Vec<VertexSet> {
        let n = self.n();
        let mut seen = removed.to_vec();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &u in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(VertexSet::from_sorted(comp));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.components(&VertexSet::new()).len() == 1
    }

    /// Whether G[X] is connected (the empty set counts as connected).
    pub fn is_connected_subset(&self, x: &VertexSet) -> bool {
        if x.is_empty() {
            return true;
        }
        let inside = x.to_mask(self.n());
        let mut seen = vec![false; self.n()];
        let mut stack = vec![x[0]];
        seen[x[0]] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if inside[u] && !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == x.len()
    }

    pub fn is_independent(&self, s: &VertexSet) -> bool {
        s.iter().enumerate().all(|(i, &u)| s[i + 1..].iter().all(|&v| !self.adjacent(u, v)))
    }

    pub fn is_clique(&self, s: &VertexSet) -> bool {
        s.iter().enumerate().all(|(i, &u)| s[i + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.m * 2 == n * n.saturating_sub(1)
    }

    /// G[X] re-indexed in ascending order of X.
    pub fn induced_subgraph(&self, x: &VertexSet) -> (Graph, VertexMap) {
        let map = VertexMap::restriction(self.n(), x);
        let mut adj = vec![Vec::new(); x.len()];
        let mut m2 = 0;
        for (i, &v) in x.iter().enumerate() {
            for &u in &self.adj[v] {
                if let Some(j) = map.from_host(u) {
                    adj[i].push(j);
                }
            }
            m2 += adj[i].len();
        }
        (Graph { adj, m: m2 / 2 }, map)
    }

    /// G[X] plus a clique on N(C) for every component C of G minus X.
    pub fn torso(&self, x: &VertexSet) -> (Graph, VertexMap) {
        let mut extra = Vec::new();
        for c in self.components(x) {
            let nc = self.neighborhood(&c);
            for (i, &a) in nc.iter().enumerate() {
                for &b in &nc[i + 1..] {
                    extra.push((a, b));
                }
            }
        }
        let map = VertexMap::restriction(self.n(), x);
        let edges = self
            .edges()
            .chain(extra)
            .filter_map(|(a, b)| Some((map.from_host(a)?, map.from_host(b)?)));
        let g = Graph::new(x.len(), edges).expect("torso edges are in range");
        (g, map)
    }

    /// Contracts the edge s1s2 onto s1; s2 disappears.
    pub fn contract_edge(&self, s1: Vertex, s2: Vertex) -> Result<(Graph, VertexMap)> {
        self.check_vertex(s1)?;
        self.check_vertex(s2)?;
        if !self.adjacent(s1, s2) {
            return Err(Error::NoSuchEdge(s1, s2));
        }
        let n = self.n();
        let mut from_host = vec![None; n];
        let mut to_host = Vec::with_capacity(n - 1);
        for v in 0..n {
            if v != s2 {
                from_host[v] = Some(to_host.len());
                to_host.push(v);
            }
        }
        from_host[s2] = from_host[s1];
        let edges = self
            .edges()
            .map(|(a, b)| (from_host[a].unwrap(), from_host[b].unwrap()))
            .filter(|(a, b)| a != b);
        let g = Graph::new(n - 1, edges).expect("contraction stays in range");
        Ok((g, VertexMap::from_parts(to_host, from_host)))
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[Vertex]) -> Graph {
        Graph::new(self.n(), self.edges().map(|(a, b)| (perm[a], perm[b]))).expect("permutation")
    }

    pub(crate) fn neighbor_bits(&self) -> Vec<u64> {
        assert!(self.n() <= 64);
        self.adj.iter().map(|l| l.iter().fold(0u64, |a, &v| a | 1 << v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn builds_triangle_and_rejects_loops() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.m(), 3);
        assert!(g.is_complete());
        assert_eq!(Graph::new(2, [(0, 0)]), Err(Error::SelfLoop(0)));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn duplicate_edges_are_counted() {
        let (g, dups) = Graph::with_duplicates(3, [(0, 1), (1, 0), (0, 1), (1, 2)]).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(dups, 2);
    }

    #[test]
    fn neighborhood_basics() {
        let k4 = generators::complete(4);
        assert_eq!(k4.neighborhood(&[0].into()), VertexSet::from([1, 2, 3]));
        assert!(k4.neighborhood(&k4.vertex_set()).is_empty());
        let cube = generators::cube();
        assert_eq!(cube.neighborhood(&[0].into()), VertexSet::from([1, 2, 4]));
    }

    #[test]
    fn components_are_ordered_partitions() {
        let p = path(3);
        assert_eq!(p.components(&[1].into()), vec![VertexSet::from([0]), VertexSet::from([2])]);
        let cube = generators::cube();
        let comps = cube.components(&[1, 2, 4].into());
        assert_eq!(comps, vec![VertexSet::from([0]), VertexSet::from([3, 5, 6, 7])]);
        assert_eq!(cube.components(&VertexSet::new()).len(), 1);
    }

    #[test]
    fn torso_examples() {
        let fig = generators::triconnected_example();
        let (t, _) = fig.torso(&[0, 1, 2, 3].into());
        assert!(t.is_complete() && t.n() == 4);
        let g = generators::glued_k5();
        let (t, map) = g.torso(&[2, 3, 4, 5, 6].into());
        assert!(t.is_complete() && t.n() == 5);
        assert_eq!(map.to_host(0), 2);
        let (t, _) = g.torso(&g.vertex_set());
        assert_eq!(t, g);
    }

    #[test]
    fn contraction_examples() {
        let k3 = generators::complete(3);
        let (g, _) = k3.contract_edge(0, 1).unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        let (g, _) = generators::complete(4).contract_edge(2, 3).unwrap();
        assert!(g.is_complete() && g.n() == 3);
        let (g, map) = generators::cube().contract_edge(0, 1).unwrap();
        assert_eq!((g.n(), g.m()), (7, 11));
        assert_eq!(map.from_host(1), map.from_host(0));
        assert!(generators::cube().contract_edge(0, 3).is_err());
    }

    #[test]
    fn vertex_set_algebra() {
        let a = VertexSet::from([1, 3, 5, 7]);
        let b = VertexSet::from([3, 4, 5]);
        assert_eq!(a.union(&b), VertexSet::from([1, 3, 4, 5, 7]));
        assert_eq!(a.intersection(&b), VertexSet::from([3, 5]));
        assert_eq!(a.difference(&b), VertexSet::from([1, 7]));
        assert!(VertexSet::from([3, 5]).is_subset(&a));
        assert!(!b.is_subset(&a));
        assert_eq!(a.intersection_len(&b), 2);
        assert_eq!(VertexSet::from_bits(a.to_bits()), a);
    }

    #[test]
    fn vertex_map_composition() {
        let g = generators::cube();
        let (h, m1) = g.induced_subgraph(&[1, 3, 5, 7].into());
        let (_, m2) = h.induced_subgraph(&[1, 2].into());
        let m = m1.then(&m2);
        assert_eq!(m.to_host(0), 3);
        assert_eq!(m.from_host(5), Some(1));
        assert_eq!(m.from_host(1), None);
    }
}
