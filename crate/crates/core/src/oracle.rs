//! Exhaustive tangle enumeration, axiom checks and k-blocks for small
//! graphs. Vertex sets are handled as u64 bitmasks.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::mincut::FlowNetwork;
use crate::separation::{check_cap, enumerate_separations, small_subsets, Separation};
use crate::tangle::{Provenance, Tangle};

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Discard choices ruled out by the closure lemmas during the search.
    pub prune: bool,
    /// Accept complete choice functions by checking the triple axiom over
    /// all member triples instead of the canonical Z-sides only.
    pub raw_t2: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { prune: true, raw_t2: false }
    }
}

struct Separator {
    set: VertexSet,
    bits: u64,
    /// Component masks, ordered by minimum vertex.
    comps: Vec<u64>,
}

struct Search {
    k: usize,
    nbr: Vec<u64>,
    seps: Vec<Separator>,
    /// Z-sides of the non-separating S: V∖S.
    fixed_z: Vec<u64>,
    choice: Vec<Option<usize>>,
    allowed: Vec<Vec<bool>>,
    opts: OracleOptions,
    found: Vec<Vec<usize>>,
}

fn popcount(x: u64) -> usize {
    x.count_ones() as usize
}

/// Neither Z1∩Z2∩Z3 is empty nor is there an edge with an endpoint in each Zi.
/// An edge uv covers the triple iff every Zi missing u contains v.
pub(crate) fn t2_holds(z: [u64; 3], nbr: &[u64]) -> bool {
    if z[0] & z[1] & z[2] != 0 {
        return true;
    }
    let mut union = z[0] | z[1] | z[2];
    while union != 0 {
        let u = union.trailing_zeros() as usize;
        union &= union - 1;
        let mut need = !0u64;
        for &zi in &z {
            if zi >> u & 1 == 0 {
                need &= zi;
            }
        }
        if nbr[u] & need != 0 {
            return true;
        }
    }
    false
}

impl Search {
    fn new(g: &Graph, k: usize, opts: OracleOptions) -> Self {
        let nbr = g.neighbor_bits();
        let full = if g.n() == 64 { !0 } else { (1u64 << g.n()) - 1 };
        let threshold = 3 * (k.saturating_sub(1)) / 2;
        let mut seps = Vec::new();
        let mut fixed_z = Vec::new();
        for s in small_subsets(g.n(), k) {
            let comps: Vec<u64> = g.components(&s).iter().map(VertexSet::to_bits).collect();
            let bits = s.to_bits();
            if comps.len() > 1 {
                seps.push(Separator { set: s, bits, comps });
            } else {
                fixed_z.push(full & !bits);
            }
        }
        let allowed = seps
            .iter()
            .map(|sp| {
                sp.comps
                    .iter()
                    .map(|&c| !opts.prune || popcount(c) + sp.set.len() > threshold)
                    .collect()
            })
            .collect();
        let n_seps = seps.len();
        Search { k, nbr, seps, fixed_z, choice: vec![None; n_seps], allowed, opts, found: Vec::new() }
    }

    fn zside(&self, i: usize) -> u64 {
        self.seps[i].comps[self.choice[i].unwrap()]
    }

    /// Assigns component `c` to separator `i` and everything it forces.
    /// Returns the assigned indices, or `None` on a conflict (after undoing).
    fn assign(&mut self, i: usize, c: usize) -> Option<Vec<usize>> {
        let mut trail = Vec::new();
        let mut queue = vec![(i, c)];
        while let Some((i, c)) = queue.pop() {
            match self.choice[i] {
                Some(prev) if prev == c => continue,
                Some(_) => {
                    self.undo(&trail);
                    return None;
                }
                None => {}
            }
            if !self.allowed[i][c] {
                self.undo(&trail);
                return None;
            }
            self.choice[i] = Some(c);
            trail.push(i);
            if !self.opts.prune {
                continue;
            }
            let zc = self.seps[i].comps[c];
            let szc = zc | self.seps[i].bits;
            // |(S∪Z) ∩ (S'∪Z')| ≥ k for every pair of members.
            for j in 0..self.seps.len() {
                if let Some(cj) = self.choice[j] {
                    let other = self.seps[j].comps[cj] | self.seps[j].bits;
                    if popcount(szc & other) < self.k {
                        self.undo(&trail);
                        return None;
                    }
                }
            }
            // A chosen component avoiding S' lies in one component of G∖S',
            // which is then forced.
            for j in 0..self.seps.len() {
                if j != i && self.seps[j].bits & zc == 0 {
                    let d = self.seps[j].comps.iter().position(|&d| d & zc != 0).expect("component covers C");
                    queue.push((j, d));
                }
            }
        }
        Some(trail)
    }

    fn undo(&mut self, trail: &[usize]) {
        for &j in trail {
            self.choice[j] = None;
        }
    }

    fn run(&mut self) {
        let Some(i) = self.choice.iter().position(Option::is_none) else {
            if self.accept() {
                self.found.push(self.choice.iter().map(|c| c.unwrap()).collect());
            }
            return;
        };
        for c in 0..self.seps[i].comps.len() {
            if let Some(trail) = self.assign(i, c) {
                self.run();
                self.undo(&trail);
            }
        }
    }

    fn accept(&self) -> bool {
        if self.opts.raw_t2 {
            let members = self.all_member_z();
            return all_triples(&members, &self.nbr);
        }
        // Every member's Z contains the canonical Z of its separator, so the
        // triple axiom is monotone and it suffices to check the
        // inclusion-minimal canonical Z-sides.
        let mut zs: Vec<u64> = (0..self.seps.len()).map(|i| self.zside(i)).chain(self.fixed_z.iter().copied()).collect();
        zs.sort_unstable();
        zs.dedup();
        let minimal: Vec<u64> =
            zs.iter().copied().filter(|&a| !zs.iter().any(|&b| b != a && b & !a == 0)).collect();
        all_triples(&minimal, &self.nbr)
    }

    /// Z-sides of every member of order below k: for each S, all unions of
    /// components containing the chosen one.
    fn all_member_z(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for (i, sp) in self.seps.iter().enumerate() {
            let chosen = self.choice[i].unwrap();
            let others: Vec<u64> = sp.comps.iter().enumerate().filter(|&(j, _)| j != chosen).map(|(_, &c)| c).collect();
            for mask in 0..1u64 << others.len() {
                let mut z = sp.comps[chosen];
                for (j, &c) in others.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        z |= c;
                    }
                }
                out.push(z);
            }
        }
        out.extend(self.fixed_z.iter().copied());
        out
    }
}

fn all_triples(zs: &[u64], nbr: &[u64]) -> bool {
    for a in 0..zs.len() {
        for b in a..zs.len() {
            for c in b..zs.len() {
                if !t2_holds([zs[a], zs[b], zs[c]], nbr) {
                    return false;
                }
            }
        }
    }
    true
}

/// All G-tangles of order k (1 ≤ k ≤ 4), sorted by their choice vectors.
pub fn enumerate_tangles(g: &Arc<Graph>, k: usize) -> Result<Vec<Tangle>> {
    enumerate_tangles_with(g, k, OracleOptions::default())
}

pub fn enumerate_tangles_with(g: &Arc<Graph>, k: usize, opts: OracleOptions) -> Result<Vec<Tangle>> {
    check_cap(g)?;
    if !(1..=4).contains(&k) {
        return Err(Error::precondition(format!("tangle order {k} outside 1..=4")));
    }
    if !g.is_connected() {
        return Err(Error::precondition("tangle enumeration needs a connected graph"));
    }
    if g.n() < k {
        // Some S with |S| < k covers V and leaves no side to choose.
        return Ok(Vec::new());
    }
    let mut search = Search::new(g, k, opts);
    search.run();
    let mut found = std::mem::take(&mut search.found);
    found.sort();
    found.dedup();
    found
        .into_iter()
        .map(|choice| {
            let map: BTreeMap<VertexSet, VertexSet> = search
                .seps
                .iter()
                .zip(&choice)
                .map(|(sp, &c)| (sp.set.clone(), VertexSet::from_bits(sp.comps[c])))
                .collect();
            Tangle::from_choices(g.clone(), k, map, Provenance::Oracle)
        })
        .collect()
}

/// Which axiom failed, with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation {
    /// Neither orientation of the separation is a member.
    Orientation(Separation),
    /// Both orientations are members.
    BothOrientations(Separation),
    EmptySide(Separation),
    Triple(Box<[Separation; 3]>),
    /// Choice function and defining predicate disagree.
    RuleMismatch(Separation),
}

/// Checks the three axioms exhaustively through the defining predicate:
/// each separation or its reversal (Z,S,Y) is a member, never both unless
/// equal; members have nonempty Z; triples over the canonical members.
pub fn check_axioms(t: &Tangle) -> Result<Vec<AxiomViolation>> {
    let g = t.graph();
    let nbr = g.neighbor_bits();
    let mut bad = Vec::new();
    for sep in enumerate_separations(g, t.order())? {
        let a = t.satisfies_rule(&sep)?;
        let b = t.satisfies_rule(&sep.reversed())?;
        if !a && !b {
            bad.push(AxiomViolation::Orientation(sep.clone()));
        } else if a && b && sep.is_proper() {
            bad.push(AxiomViolation::BothOrientations(sep.clone()));
        }
        if a && sep.z().is_empty() {
            bad.push(AxiomViolation::EmptySide(sep.clone()));
        }
        if a != t.contains(&sep)? {
            bad.push(AxiomViolation::RuleMismatch(sep));
        }
    }
    let mut canon = t.canonical_separations()?;
    for s in small_subsets(g.n(), t.order()) {
        if g.components(&s).len() <= 1 {
            canon.push(t.canonical(&s)?);
        }
    }
    let zs: Vec<u64> = canon.iter().map(|c| c.z().to_bits()).collect();
    'outer: for a in 0..zs.len() {
        for b in a..zs.len() {
            for c in b..zs.len() {
                if !t2_holds([zs[a], zs[b], zs[c]], &nbr) {
                    bad.push(AxiomViolation::Triple(Box::new([canon[a].clone(), canon[b].clone(), canon[c].clone()])));
                    break 'outer;
                }
            }
        }
    }
    Ok(bad)
}

/// The triple axiom over every triple of members, with no reduction.
pub fn raw_triple_axiom(t: &Tangle) -> Result<bool> {
    let g = t.graph();
    let nbr = g.neighbor_bits();
    let mut zs = Vec::new();
    for sep in enumerate_separations(g, t.order())? {
        if t.satisfies_rule(&sep)? {
            zs.push(sep.z().to_bits());
        }
    }
    Ok(all_triples(&zs, &nbr))
}

/// Some proper separation of order at most k puts u and v on opposite
/// sides.
pub fn pair_separable(net: &mut FlowNetwork<'_>, g: &Graph, u: Vertex, v: Vertex, k: usize) -> bool {
    if u == v || g.adjacent(u, v) {
        return false;
    }
    net.separate(&[u], &[v], &[u, v], k as u32 + 1, Some(k)).is_some()
}

/// Whether no separation of order at most k splits X.
pub fn is_inseparable(g: &Graph, x: &VertexSet, k: usize) -> bool {
    let mut net = FlowNetwork::new(g);
    x.iter().enumerate().all(|(i, &u)| x[i + 1..].iter().all(|&v| !pair_separable(&mut net, g, u, v, k)))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Block {
    pub set: VertexSet,
    /// |X| ≥ k + 2.
    pub proper: bool,
}

/// All k-blocks: maximal sets no separation of order at most k splits.
/// Pairwise inseparability suffices, so these are the maximal cliques of the
/// inseparability graph.
pub fn find_blocks(g: &Graph, k: usize) -> Result<Vec<Block>> {
    check_cap(g)?;
    if k > 3 {
        return Err(Error::precondition("blocks are computed for k ≤ 3"));
    }
    let n = g.n();
    let mut net = FlowNetwork::new(g);
    let mut adj = vec![0u64; n];
    for u in 0..n {
        for v in u + 1..n {
            if !pair_separable(&mut net, g, u, v, k) {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
        }
    }
    let mut cliques = Vec::new();
    let all = if n == 64 { !0 } else { (1u64 << n) - 1 };
    bron_kerbosch(0, all, 0, &adj, &mut cliques);
    let mut blocks: Vec<Block> = cliques
        .into_iter()
        .map(|c| {
            let set = VertexSet::from_bits(c);
            let proper = set.len() >= k + 2;
            Block { set, proper }
        })
        .collect();
    blocks.sort();
    Ok(blocks)
}

fn bron_kerbosch(r: u64, mut p: u64, mut x: u64, adj: &[u64], out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        if r != 0 {
            out.push(r);
        }
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut cand = p & !adj[pivot];
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        bron_kerbosch(r | 1 << v, p & adj[v], x & adj[v], adj, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn count(g: Graph, k: usize) -> usize {
        enumerate_tangles(&Arc::new(g), k).unwrap().len()
    }

    #[test]
    fn t2_edge_rule() {
        // Path 0-1: Z-sides {0}, {1}, {0,1} share nothing but the edge covers them.
        let nbr = generators::path(2).neighbor_bits();
        assert!(t2_holds([0b01, 0b10, 0b11], &nbr));
        let nbr3 = generators::path(3).neighbor_bits();
        assert!(!t2_holds([0b001, 0b100, 0b100], &nbr3));
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(generators::complete(5), 4), 1);
        assert_eq!(count(generators::complete(4), 4), 0);
        assert_eq!(count(generators::cube(), 4), 1);
        assert_eq!(count(generators::path(5), 2), 4);
        assert_eq!(count(generators::cycle(6), 3), 0);
        assert_eq!(count(generators::cycle(6), 2), 1);
        assert_eq!(count(generators::path(1), 1), 1);
    }

    #[test]
    fn pruning_does_not_change_results() {
        for g in [generators::glued_k5(), generators::th3(), generators::cycle(5), generators::path(4)] {
            let g = Arc::new(g);
            for k in 1..=4 {
                let a = enumerate_tangles(&g, k).unwrap();
                let b = enumerate_tangles_with(&g, k, OracleOptions { prune: false, raw_t2: true }).unwrap();
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(&b) {
                    assert!(x.same_choices(y).unwrap());
                }
            }
        }
    }

    #[test]
    fn oracle_tangles_pass_axioms() {
        let g = Arc::new(generators::glued_k5());
        for t in enumerate_tangles(&g, 4).unwrap() {
            assert_eq!(check_axioms(&t).unwrap(), vec![]);
            assert!(raw_triple_axiom(&t).unwrap());
        }
    }

    #[test]
    fn blocks_of_small_graphs() {
        let k5 = find_blocks(&generators::complete(5), 3).unwrap();
        assert_eq!(k5, vec![Block { set: (0..5).collect(), proper: true }]);
        let fig = find_blocks(&generators::triconnected_example(), 2).unwrap();
        assert!(fig.iter().any(|b| b.set == VertexSet::from([0, 1, 2, 3]) && b.proper));
        let p = find_blocks(&generators::path(3), 1).unwrap();
        assert_eq!(p.len(), 2);
    }
}
