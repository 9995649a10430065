//! Vertex separations (Y, S, Z): partitions of V with no Y–Z edge.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};

/// Largest graph the exhaustive enumerations accept unless overridden by
/// `Q4_ORACLE_CAP`.
pub const DEFAULT_ORACLE_CAP: usize = 32;

/// Deliberate defects for testing that the fuzz battery notices them.
#[doc(hidden)]
pub mod fault {
    use std::cell::Cell;

    thread_local! {
        static MEET: Cell<bool> = const { Cell::new(false) };
    }

    pub(crate) fn meet_faulty() -> bool {
        MEET.with(Cell::get)
    }

    /// Runs `f` on this thread with a meet that drops the Z∩S' part of
    /// the separator.
    pub fn with_faulty_meet<T>(f: impl FnOnce() -> T) -> T {
        let old = MEET.with(|m| m.replace(true));
        let out = f();
        MEET.with(|m| m.set(old));
        out
    }
}

pub fn oracle_cap() -> usize {
    std::env::var("Q4_ORACLE_CAP").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_ORACLE_CAP)
}

pub(crate) fn check_cap(g: &Graph) -> Result<()> {
    let cap = oracle_cap().min(64);
    if g.n() > cap {
        Err(Error::SizeCap { n: g.n(), cap })
    } else {
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Separation {
    y: VertexSet,
    s: VertexSet,
    z: VertexSet,
}

impl fmt::Debug for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}, {:?})", self.y, self.s, self.z)
    }
}

impl Separation {
    /// Validates the triple against `g`.
    pub fn new(g: &Graph, y: VertexSet, s: VertexSet, z: VertexSet) -> Result<Self> {
        let sep = Separation { y, s, z };
        sep.validate(g)?;
        Ok(sep)
    }

    pub(crate) fn from_parts(y: VertexSet, s: VertexSet, z: VertexSet) -> Self {
        Separation { y, s, z }
    }

    /// The separation with separator `s`, Z-side `z` and everything else in Y.
    pub(crate) fn from_sz(g: &Graph, s: VertexSet, z: VertexSet) -> Self {
        let y = g.vertex_set().difference(&s).difference(&z);
        Separation { y, s, z }
    }

    /// (∅, ∅, V).
    pub fn trivial(g: &Graph) -> Self {
        Separation { y: VertexSet::new(), s: VertexSet::new(), z: g.vertex_set() }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        let n = g.n();
        let mut side = vec![u8::MAX; n];
        for (tag, set) in [(0u8, &self.y), (1, &self.s), (2, &self.z)] {
            g.check_set(set)?;
            for &v in set {
                if side[v] != u8::MAX {
                    return Err(Error::NotAPartition(format!("vertex {v} in two parts")));
                }
                side[v] = tag;
            }
        }
        if let Some(v) = side.iter().position(|&t| t == u8::MAX) {
            return Err(Error::NotAPartition(format!("vertex {v} in no part")));
        }
        for &u in &self.y {
            if let Some(&v) = g.neighbors(u).iter().find(|&&v| side[v] == 2) {
                return Err(Error::CrossingEdge(u, v));
            }
        }
        Ok(())
    }

    pub fn y(&self) -> &VertexSet {
        &self.y
    }

    pub fn s(&self) -> &VertexSet {
        &self.s
    }

    pub fn z(&self) -> &VertexSet {
        &self.z
    }

    pub fn order(&self) -> usize {
        self.s.len()
    }

    pub fn is_proper(&self) -> bool {
        !self.y.is_empty() && !self.z.is_empty()
    }

    pub fn reversed(&self) -> Separation {
        Separation { y: self.z.clone(), s: self.s.clone(), z: self.y.clone() }
    }

    /// S ∪ Z.
    pub fn sz(&self) -> VertexSet {
        self.s.union(&self.z)
    }

    /// Y ∪ S.
    pub fn ys(&self) -> VertexSet {
        self.y.union(&self.s)
    }

    /// (Y∪Y', (S∩Z')∪(S∩S')∪(Z∩S'), Z∩Z').
    pub fn meet(&self, o: &Separation) -> Separation {
        let mut s = self.s.intersection(&o.z).union(&self.s.intersection(&o.s));
        if !fault::meet_faulty() {
            s = s.union(&self.z.intersection(&o.s));
        }
        Separation { y: self.y.union(&o.y), s, z: self.z.intersection(&o.z) }
    }

    /// (Y∩Y', (S∩Y')∪(S∩S')∪(Y∩S'), Z∪Z').
    pub fn join(&self, o: &Separation) -> Separation {
        let s = self.s.intersection(&o.y).union(&self.s.intersection(&o.s)).union(&self.y.intersection(&o.s));
        Separation { y: self.y.intersection(&o.y), s, z: self.z.union(&o.z) }
    }

    /// S∪Z ⊂ S'∪Z', or S∪Z = S'∪Z' and S ⊆ S'.
    pub fn preceq(&self, o: &Separation) -> bool {
        let a = self.sz();
        let b = o.sz();
        if a == b {
            self.s.is_subset(&o.s)
        } else {
            a.is_subset(&b)
        }
    }

    pub fn strictly_precedes(&self, o: &Separation) -> bool {
        self != o && self.preceq(o)
    }

    /// Proper with |Y| = 1 and S independent.
    pub fn is_degenerate(&self, g: &Graph) -> Result<bool> {
        if !self.is_proper() {
            return Err(Error::NotProper);
        }
        Ok(self.y.len() == 1 && g.is_independent(&self.s))
    }
}

/// S is independent, G∖S has exactly two components, one of them a single vertex.
pub fn is_degenerate_separator(g: &Graph, s: &VertexSet) -> bool {
    if !g.is_independent(s) {
        return false;
    }
    let comps = g.components(s);
    comps.len() == 2 && comps.iter().any(|c| c.len() == 1)
}

/// All vertex subsets of size below `k`, by size then lexicographically.
pub(crate) fn small_subsets(n: usize, k: usize) -> impl Iterator<Item = VertexSet> {
    (0..k.min(n + 1)).flat_map(move |size| (0..n).combinations(size).map(VertexSet::from_sorted))
}

/// Every separation of order below `k`: for each S, every assignment of the
/// components of G∖S to the two sides.
pub fn enumerate_separations(g: &Graph, k: usize) -> Result<SeparationIter<'_>> {
    check_cap(g)?;
    if k > 4 {
        return Err(Error::precondition("separation enumeration is limited to order below 4"));
    }
    Ok(SeparationIter { g, subsets: Box::new(small_subsets(g.n(), k)), current: None })
}

pub struct SeparationIter<'a> {
    g: &'a Graph,
    subsets: Box<dyn Iterator<Item = VertexSet> + 'a>,
    current: Option<(VertexSet, Vec<VertexSet>, u64)>,
}

impl Iterator for SeparationIter<'_> {
    type Item = Separation;

    fn next(&mut self) -> Option<Separation> {
        loop {
            if let Some((s, comps, mask)) = &mut self.current {
                if *mask < 1u64 << comps.len() {
                    let m = *mask;
                    *mask += 1;
                    let (mut y, mut z) = (Vec::new(), Vec::new());
                    for (i, c) in comps.iter().enumerate() {
                        if m >> i & 1 == 1 {
                            z.extend_from_slice(c);
                        } else {
                            y.extend_from_slice(c);
                        }
                    }
                    return Some(Separation { y: y.into(), s: s.clone(), z: z.into() });
                }
            }
            let s = self.subsets.next()?;
            let comps = self.g.components(&s);
            self.current = Some((s, comps, 0));
        }
    }
}

/// A separation in edge-partition form (A, B): subgraphs with A ∪ B = G and
/// disjoint edge sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsSeparation {
    pub a_vertices: VertexSet,
    pub a_edges: Vec<(Vertex, Vertex)>,
    pub b_vertices: VertexSet,
    pub b_edges: Vec<(Vertex, Vertex)>,
}

impl RsSeparation {
    /// A = G[Y∪S] with all edges meeting Y; B = G[S∪Z] with the remaining
    /// edges (in particular the edges inside S).
    pub fn from_separation(g: &Graph, sep: &Separation) -> Self {
        let in_y = sep.y.to_mask(g.n());
        let (a_edges, b_edges): (Vec<_>, Vec<_>) = g.edges().partition(|&(u, v)| in_y[u] || in_y[v]);
        RsSeparation { a_vertices: sep.ys(), a_edges, b_vertices: sep.sz(), b_edges }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        g.check_set(&self.a_vertices)?;
        g.check_set(&self.b_vertices)?;
        if self.a_vertices.union(&self.b_vertices).len() != g.n() {
            return Err(Error::NotAPartition("A and B do not cover V".into()));
        }
        let norm = |e: &(Vertex, Vertex)| (e.0.min(e.1), e.0.max(e.1));
        let mut seen = std::collections::HashSet::new();
        for (list, verts) in [(&self.a_edges, &self.a_vertices), (&self.b_edges, &self.b_vertices)] {
            for e in list {
                let (u, v) = norm(e);
                if !g.adjacent(u, v) {
                    return Err(Error::NoSuchEdge(u, v));
                }
                if !verts.contains(u) || !verts.contains(v) {
                    return Err(Error::NotAPartition(format!("edge {u}-{v} leaves its side")));
                }
                if !seen.insert((u, v)) {
                    return Err(Error::NotAPartition(format!("edge {u}-{v} on both sides")));
                }
            }
        }
        if seen.len() != g.m() {
            return Err(Error::NotAPartition("edges of G not covered".into()));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.a_vertices.intersection_len(&self.b_vertices)
    }

    /// ⟨A,B⟩ = (V(A)∖V(B), V(A)∩V(B), V(B)∖V(A)).
    pub fn to_separation(&self, g: &Graph) -> Result<Separation> {
        self.validate(g)?;
        Separation::new(
            g,
            self.a_vertices.difference(&self.b_vertices),
            self.a_vertices.intersection(&self.b_vertices),
            self.b_vertices.difference(&self.a_vertices),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn sep(g: &Graph, y: &[usize], s: &[usize], z: &[usize]) -> Separation {
        Separation::new(g, y.iter().copied().collect(), s.iter().copied().collect(), z.iter().copied().collect())
            .unwrap()
    }

    #[test]
    fn construction_checks() {
        let p = generators::path(3);
        assert!(sep(&p, &[0], &[1], &[2]).is_proper());
        assert_eq!(
            Separation::new(&p, [0].into(), VertexSet::new(), [1, 2].into()),
            Err(Error::CrossingEdge(0, 1))
        );
        assert!(!Separation::trivial(&p).is_proper());
        assert!(Separation::new(&p, [0].into(), [0].into(), [1, 2].into()).is_err());
    }

    #[test]
    fn meet_and_join_on_a_path() {
        let p = generators::path(5);
        let a = sep(&p, &[0], &[1], &[2, 3, 4]);
        let b = sep(&p, &[4], &[3], &[0, 1, 2]);
        assert_eq!(a.meet(&b), sep(&p, &[0, 4], &[1, 3], &[2]));
        assert_eq!(a.join(&b), Separation::trivial(&p));
        assert_eq!(a.meet(&a), a);
        assert_eq!(a.join(&a), a);
        assert_eq!(a.meet(&Separation::trivial(&p)), a);
        assert_eq!(a.join(&Separation::trivial(&p)), Separation::trivial(&p));
    }

    #[test]
    fn order_examples() {
        let p = generators::path(5);
        let a = sep(&p, &[0, 1], &[2], &[3, 4]);
        let b = sep(&p, &[0], &[1], &[2, 3, 4]);
        assert!(a.preceq(&b) && !b.preceq(&a));
        assert!(a.preceq(&a));
        let p6 = generators::path(6);
        let c = sep(&p6, &[0, 1, 2], &[3], &[4, 5]);
        let d = sep(&p6, &[3, 4, 5], &[2], &[0, 1]);
        assert!(!c.preceq(&d) && !d.preceq(&c));
    }

    #[test]
    fn degeneracy_examples() {
        let cube = generators::cube();
        assert!(sep(&cube, &[0], &[1, 2, 4], &[3, 5, 6, 7]).is_degenerate(&cube).unwrap());
        let th3 = generators::th3();
        assert!(!sep(&th3, &[4], &[0, 1, 2], &[3, 5, 6]).is_degenerate(&th3).unwrap());
        let g = generators::glued_k5();
        assert!(!sep(&g, &[0, 1], &[2, 3, 4], &[5, 6]).is_degenerate(&g).unwrap());
        assert_eq!(Separation::trivial(&g).is_degenerate(&g), Err(Error::NotProper));
        assert!(is_degenerate_separator(&cube, &[1, 2, 4].into()));
        assert!(!is_degenerate_separator(&g, &[2, 3, 4].into()));
    }

    #[test]
    fn enumeration_counts() {
        let k3 = generators::complete(3);
        assert_eq!(enumerate_separations(&k3, 1).unwrap().count(), 2);
        let k4 = generators::complete(4);
        let size3: Vec<_> = enumerate_separations(&k4, 4).unwrap().filter(|s| s.order() == 3).collect();
        assert_eq!(size3.len(), 8);
        assert!(size3.iter().all(|s| s.y().len() + s.z().len() == 1));
    }

    #[test]
    fn cube_enumeration_matches_raw_partitions() {
        let cube = generators::cube();
        let listed: std::collections::BTreeSet<Separation> = enumerate_separations(&cube, 4).unwrap().collect();
        let mut raw = 0;
        // Every vertex gets one of three labels.
        for code in 0..3usize.pow(8) {
            let mut c = code;
            let (mut y, mut s, mut z) = (vec![], vec![], vec![]);
            for v in 0..8 {
                match c % 3 {
                    0 => y.push(v),
                    1 => s.push(v),
                    _ => z.push(v),
                }
                c /= 3;
            }
            if s.len() >= 4 {
                continue;
            }
            if let Ok(x) = Separation::new(&cube, y.into(), s.into(), z.into()) {
                assert!(listed.contains(&x));
                raw += 1;
            }
        }
        assert_eq!(raw, listed.len());
    }

    #[test]
    fn rs_round_trip() {
        let p = generators::path(3);
        let rs = RsSeparation {
            a_vertices: [0, 1].into(),
            a_edges: vec![(0, 1)],
            b_vertices: [1, 2].into(),
            b_edges: vec![(1, 2)],
        };
        assert_eq!(rs.to_separation(&p).unwrap(), sep(&p, &[0], &[1], &[2]));
        let bad = RsSeparation {
            a_vertices: p.vertex_set(),
            a_edges: p.edges().collect(),
            b_vertices: p.vertex_set(),
            b_edges: p.edges().collect(),
        };
        assert!(bad.to_separation(&p).is_err());
        let g = generators::glued_k5();
        let s = sep(&g, &[0, 1], &[2, 3, 4], &[5, 6]);
        let rs = RsSeparation::from_separation(&g, &s);
        assert_eq!(rs.to_separation(&g).unwrap(), s);
        assert_eq!(rs.order(), 3);
    }
}
