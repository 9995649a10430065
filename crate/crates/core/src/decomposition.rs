//! Tree decompositions: block–cut trees, triconnected splitting, and the
//! adhesion-3 decomposition of a 3-connected graph into quasi-4-connected
//! components, stitched into one tree.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::defined::has_split_vertex;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexMap, VertexSet};
use crate::mincut::{find_nondegenerate_3separator, require_k_connected, small_separation};
use crate::minor::MinorModel;
use crate::quasi4::{check_region_in_triconnected, non_exceptional_extension, region_of_tangle_unaudited, region_of_tangle_with, Survivor};
use crate::separation::{oracle_cap, Separation};
use crate::tangle::Tangle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TorsoClass {
    /// Torso is K_k with k ≤ 4.
    Complete(usize),
    Quasi4,
    Triconnected,
    Biconnected,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub bag: VertexSet,
    pub parent: Option<usize>,
    /// sep(parent, self): S is the adhesion set, S ∪ Z the union of the
    /// bags in this subtree.
    pub separation: Option<Separation>,
    pub class: TorsoClass,
    /// Faithful model of the torso in G, for quasi-4-connected torsos.
    pub witness: Option<Arc<MinorModel>>,
}

/// Rooted at node 0; parents precede their children.
#[derive(Clone, Debug, Default)]
pub struct TreeDecomposition {
    nodes: Vec<Node>,
}

impl TreeDecomposition {
    /// Nodes with arbitrary parent links; nothing is checked.
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        TreeDecomposition { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&u| self.nodes[u].parent == Some(t))
    }

    pub fn adhesion(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| n.parent.map(|p| n.bag.intersection_len(&self.nodes[p].bag)))
            .max()
            .unwrap_or(0)
    }

    /// Nodes expected to carry an order-4 tangle: bags of size at least 5,
    /// and 4-bags each of whose 3-subsets is the intersection with some
    /// neighbouring bag.
    pub fn tangle_nodes(&self) -> Vec<usize> {
        let mut shared: Vec<Vec<VertexSet>> = vec![Vec::new(); self.nodes.len()];
        for (u, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                let s = n.bag.intersection(&self.nodes[p].bag);
                shared[u].push(s.clone());
                shared[p].push(s);
            }
        }
        (0..self.nodes.len())
            .filter(|&t| {
                let bag = &self.nodes[t].bag;
                bag.len() >= 5 || (bag.len() == 4 && bag.iter().all(|&v| shared[t].contains(&bag.without(v))))
            })
            .collect()
    }
}

/// An unrooted tree of bags that layers refine node by node.
#[derive(Clone, Debug, Default)]
struct Draft {
    bags: Vec<VertexSet>,
    class: Vec<TorsoClass>,
    witness: Vec<Option<Arc<MinorModel>>>,
    alive: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl Draft {
    fn push(&mut self, bag: VertexSet, class: TorsoClass, witness: Option<Arc<MinorModel>>) -> usize {
        self.bags.push(bag);
        self.class.push(class);
        self.witness.push(witness);
        self.alive.push(true);
        self.bags.len() - 1
    }

    fn from_decomposition(td: &TreeDecomposition) -> Draft {
        let mut d = Draft::default();
        for n in &td.nodes {
            d.push(n.bag.clone(), n.class, n.witness.clone());
        }
        for (u, n) in td.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                d.edges.push((p, u));
            }
        }
        d
    }

    /// Replaces node `i` by `sub`, whose bags are already in host ids.
    /// Each former neighbour is attached to the first new node whose bag
    /// holds the shared vertices.
    fn replace(&mut self, i: usize, sub: Draft) -> Result<()> {
        let offset = self.bags.len();
        for k in 0..sub.bags.len() {
            self.push(sub.bags[k].clone(), sub.class[k], sub.witness[k].clone());
        }
        self.edges.extend(sub.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
        let old = std::mem::take(&mut self.edges);
        for (a, b) in old {
            if a != i && b != i {
                self.edges.push((a, b));
                continue;
            }
            let other = if a == i { b } else { a };
            let shared = self.bags[i].intersection(&self.bags[other]);
            let host = (offset..offset + sub.bags.len())
                .find(|&k| shared.is_subset(&self.bags[k]))
                .ok_or_else(|| Error::invariant("refinement-covers-adhesion", format!("{shared:?}")))?;
            self.edges.push((other, host));
        }
        self.alive[i] = false;
        Ok(())
    }

    /// Roots the tree at the first live node and computes separations.
    fn assemble(&self, g: &Graph) -> TreeDecomposition {
        let n = self.bags.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        let Some(root) = (0..n).find(|&i| self.alive[i]) else {
            return TreeDecomposition::default();
        };
        let mut order = vec![root];
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let a = order[i];
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    parent[b] = a;
                    order.push(b);
                }
            }
            i += 1;
        }
        let mut index = vec![usize::MAX; n];
        for (k, &a) in order.iter().enumerate() {
            index[a] = k;
        }
        let nodes = order
            .iter()
            .map(|&a| Node {
                bag: self.bags[a].clone(),
                parent: (parent[a] != usize::MAX).then(|| index[parent[a]]),
                separation: None,
                class: self.class[a],
                witness: self.witness[a].clone(),
            })
            .collect();
        let mut td = TreeDecomposition { nodes };
        hoist(&mut td);
        fill_separations(g, &mut td);
        td
    }
}

/// Moves each node up past ancestors that already hold its adhesion set,
/// so a subtree does not hang off a vertex of the separator above it.
fn hoist(td: &mut TreeDecomposition) {
    for c in 1..td.nodes.len() {
        while let Some(t) = td.nodes[c].parent {
            let Some(p) = td.nodes[t].parent else { break };
            let s = td.nodes[c].bag.intersection(&td.nodes[t].bag);
            if !s.is_subset(&td.nodes[p].bag) {
                break;
            }
            td.nodes[c].parent = Some(p);
        }
    }
}

/// sep(parent, t) from the bags: S = β(t) ∩ β(parent), S ∪ Z = ⋃ of the
/// subtree below t.
pub(crate) fn fill_separations(g: &Graph, td: &mut TreeDecomposition) {
    let n = td.nodes.len();
    let mut below: Vec<VertexSet> = td.nodes.iter().map(|x| x.bag.clone()).collect();
    for t in (1..n).rev() {
        if let Some(p) = td.nodes[t].parent {
            let u = below[p].union(&below[t]);
            below[p] = u;
        }
    }
    let all = g.vertex_set();
    for t in 0..n {
        if let Some(p) = td.nodes[t].parent {
            let s = td.nodes[t].bag.intersection(&td.nodes[p].bag);
            let z = below[t].difference(&s);
            let y = all.difference(&below[t]);
            td.nodes[t].separation = Some(Separation::from_parts(y, s, z));
        }
    }
}

fn complete_class(g: &Graph, bag: &VertexSet, otherwise: TorsoClass) -> TorsoClass {
    if bag.len() <= 4 && g.torso(bag).0.is_complete() {
        TorsoClass::Complete(bag.len())
    } else {
        otherwise
    }
}

/// Block–cut tree: one bag per block (isolated vertices and bridges
/// included), adjacent blocks sharing a cut vertex; components are linked
/// by empty separators.
pub fn biconnected_components(g: &Graph) -> TreeDecomposition {
    let blocks = blocks(g);
    let mut d = Draft::default();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for b in &blocks {
        let class = if b.len() <= 2 { TorsoClass::Complete(b.len()) } else { TorsoClass::Biconnected };
        let id = d.push(b.clone(), class, None);
        for &v in b {
            holders[v].push(id);
        }
    }
    let mut seen = vec![false; blocks.len()];
    let mut comp_roots = Vec::new();
    for start in 0..blocks.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        comp_roots.push(start);
        let mut queue = VecDeque::from([start]);
        while let Some(b) = queue.pop_front() {
            for &v in &blocks[b] {
                for &o in &holders[v] {
                    if !seen[o] {
                        seen[o] = true;
                        d.edges.push((b, o));
                        queue.push_back(o);
                    }
                }
            }
        }
    }
    for &r in comp_roots.iter().skip(1) {
        d.edges.push((comp_roots[0], r));
    }
    d.assemble(g)
}

/// Vertex sets of the blocks, ordered by discovery; isolated vertices are
/// their own blocks.
fn blocks(g: &Graph) -> Vec<VertexSet> {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut out = Vec::new();
    let mut edge_stack: Vec<(Vertex, Vertex)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        if g.degree(root) == 0 {
            disc[root] = timer;
            timer += 1;
            out.push(VertexSet::singleton(root));
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        // (vertex, parent, next neighbour index)
        let mut stack: Vec<(Vertex, Vertex, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, p, ref mut i)) = stack.last_mut() {
            if *i < g.degree(v) {
                let w = g.neighbors(v)[*i];
                *i += 1;
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    edge_stack.push((v, w));
                    stack.push((w, v, 0));
                } else if w != p && disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let mut b = Vec::new();
                        while let Some((x, y)) = edge_stack.pop() {
                            b.push(x);
                            b.push(y);
                            if (x, y) == (u, v) {
                                break;
                            }
                        }
                        out.push(b.into_iter().collect());
                    }
                }
            }
        }
    }
    out
}

/// Splits a 2-connected graph along 2-separations until every piece is
/// 3-connected or a triangle. Pieces carry virtual edges on their split
/// pairs, so each torso is the piece graph.
pub fn triconnected_decomposition(g: &Graph) -> Result<TreeDecomposition> {
    require_k_connected(g, 2).map_err(|e| Error::precondition(format!("triconnected splitting needs a 2-connected graph: {e}")))?;
    Ok(triconnected_draft(g).assemble(g))
}

fn triconnected_draft(g: &Graph) -> Draft {
    struct Piece {
        verts: VertexSet,
        virt: Vec<((Vertex, Vertex), usize)>,
    }
    let mut work = VecDeque::from([Piece { verts: g.vertex_set(), virt: Vec::new() }]);
    let mut done: Vec<Piece> = Vec::new();
    let mut next_id = 0;
    while let Some(p) = work.pop_front() {
        if p.verts.len() <= 3 {
            done.push(p);
            continue;
        }
        let (sub, map) = g.induced_subgraph(&p.verts);
        let extra = p.virt.iter().map(|&((a, b), _)| (map.from_host(a).unwrap(), map.from_host(b).unwrap()));
        let pg = Graph::new(sub.n(), sub.edges().chain(extra)).expect("piece edges are in range");
        let Some(sep) = small_separation(&pg, 2) else {
            done.push(p);
            continue;
        };
        let s = map.set_to_host(sep.s());
        let (a, b) = (s[0], s[1]);
        let id = next_id;
        next_id += 1;
        let mut parts: Vec<Piece> = pg
            .components(sep.s())
            .into_iter()
            .map(|c| Piece { verts: map.set_to_host(&c).union(&s), virt: vec![((a, b), id)] })
            .collect();
        for &(e, eid) in &p.virt {
            let k = parts.iter().position(|q| q.verts.contains(e.0) && q.verts.contains(e.1)).unwrap();
            parts[k].virt.push((e, eid));
        }
        work.extend(parts);
    }
    let mut d = Draft::default();
    let mut holders: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in &done {
        let class = if p.verts.len() <= 3 { TorsoClass::Complete(p.verts.len()) } else { TorsoClass::Triconnected };
        let id = d.push(p.verts.clone(), class, None);
        for &(_, eid) in &p.virt {
            holders.entry(eid).or_default().push(id);
        }
    }
    for hs in holders.values() {
        for &h in &hs[1..] {
            d.edges.push((hs[0], h));
        }
    }
    d
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Quasi4Options {
    /// Also mark 4-bags produced by split vertices as quasi-4-connected
    /// components when their region has a non-exceptional extension.
    pub absorb_extended_regions: bool,
    /// Run the full crossedge-contraction pipeline with its checks for
    /// every region (oracle-size graphs only).
    pub audit: bool,
}

/// Adhesion-3 tree decomposition of a 3-connected graph whose torsos are
/// K3, K4 or quasi-4-connected components.
pub fn decompose_quasi4(g: &Arc<Graph>) -> Result<TreeDecomposition> {
    decompose_quasi4_with(g, Quasi4Options::default())
}

pub fn decompose_quasi4_with(g: &Arc<Graph>, opts: Quasi4Options) -> Result<TreeDecomposition> {
    let root = find_nondegenerate_3separator(g)?;
    let all = g.vertex_set();
    let Some(sr) = root else {
        let class = complete_class(g, &all, TorsoClass::Quasi4);
        let witness = (class == TorsoClass::Quasi4).then(|| Arc::new(MinorModel::identity(g.clone())));
        let td = TreeDecomposition {
            nodes: vec![Node { bag: all, parent: None, separation: None, class, witness }],
        };
        return Ok(td);
    };
    let audit = opts.audit && g.n() <= oracle_cap().min(64);
    let mut nodes = vec![Node { bag: sr.clone(), parent: None, separation: None, class: TorsoClass::Complete(3), witness: None }];
    let mut queue: VecDeque<(usize, Separation)> = VecDeque::new();
    let child_sep = |n: VertexSet, c: VertexSet| Separation::from_parts(all.difference(&n).difference(&c), n, c);
    for c in g.components(&sr) {
        queue.push_back((0, child_sep(sr.clone(), c)));
    }
    while let Some((parent, sep)) = queue.pop_front() {
        let (s0, z0) = (sep.s(), sep.z());
        let here = nodes.len();
        let mut children = Vec::new();
        let (bag, class, witness) = if z0.len() <= 1 {
            let bag = s0.union(z0);
            (bag.clone(), TorsoClass::Complete(bag.len()), None)
        } else if let Some(z) = has_split_vertex(g, &sep)? {
            let bag = s0.with(z);
            for c in g.components(&bag) {
                if c.is_subset(z0) {
                    children.push(child_sep(g.neighborhood(&c), c));
                }
            }
            let mut class = TorsoClass::Complete(4);
            let mut witness = None;
            if opts.absorb_extended_regions {
                if let Ok(region) = check_region_in_triconnected(g, &bag) {
                    if non_exceptional_extension(&region)?.is_some() {
                        class = TorsoClass::Quasi4;
                        witness = Some(region.witness_model().clone());
                    }
                }
            }
            (bag, class, witness)
        } else {
            if sep.is_degenerate(g)? {
                let dump = crate::io::write_dimacs(g);
                return Err(Error::invariant("case-3-nondegenerate", format!("degenerate tree-edge separation {sep:?} in graph\n{dump}")));
            }
            let t = Tangle::defined_unchecked(g.clone(), sep.clone());
            let survivor = Survivor::Prefer(s0.clone());
            let region = if audit { region_of_tangle_with(&t, &survivor, true)? } else { region_of_tangle_unaudited(&t, &survivor)? };
            let r = region.vertices().clone();
            if !s0.is_subset(&r) {
                return Err(Error::invariant("region-keeps-parent-separator", format!("{s0:?} not in {r:?}")));
            }
            for c in g.components(&r) {
                if c.is_subset(sep.y()) {
                    continue;
                }
                if !c.is_disjoint(sep.y()) {
                    return Err(Error::invariant("region-component-side", format!("{c:?}")));
                }
                let nc = g.neighborhood(&c);
                if nc.len() != 3 {
                    return Err(Error::invariant("region-component-attachment", format!("{c:?} sees {nc:?}")));
                }
                children.push(child_sep(nc, c));
            }
            let class = complete_class(g, &r, TorsoClass::Quasi4);
            let witness = (class == TorsoClass::Quasi4).then(|| region.witness_model().clone());
            (r, class, witness)
        };
        nodes.push(Node { bag, parent: Some(parent), separation: Some(sep), class, witness });
        for c in children {
            queue.push_back((here, c));
        }
    }
    Ok(TreeDecomposition { nodes })
}

/// Model of torso(G, X) in G when every component of G∖X has at most two
/// neighbours: a component seeing a pair joins the branch set of the
/// smaller vertex.
fn torso_model_small_attachments(g: &Arc<Graph>, x: &VertexSet) -> Result<MinorModel> {
    let (torso, map) = g.torso(x);
    let mut branch: Vec<VertexSet> = (0..torso.n()).map(|i| VertexSet::singleton(map.to_host(i))).collect();
    for c in g.components(x) {
        let nc = g.neighborhood(&c);
        if nc.len() > 2 {
            return Err(Error::invariant("triconnected-attachment", format!("{c:?} sees {nc:?}")));
        }
        if nc.len() == 2 {
            let i = map.from_host(nc[0]).unwrap();
            branch[i] = branch[i].union(&c);
        }
    }
    let anchors = (0..torso.n()).map(|i| map.to_host(i)).collect();
    MinorModel::new(g.clone(), Arc::new(torso), branch, Some(anchors))
}

fn map_draft(td: &TreeDecomposition, map: &VertexMap, outer: Option<&MinorModel>) -> Result<Draft> {
    let mut d = Draft::from_decomposition(td);
    for b in &mut d.bags {
        *b = map.set_to_host(b);
    }
    if let Some(outer) = outer {
        for w in &mut d.witness {
            if let Some(inner) = w {
                *w = Some(Arc::new(MinorModel::compose(outer, inner)?));
            }
        }
    }
    Ok(d)
}

/// The full decomposition down to `level`: 2 stops at blocks, 3 at
/// triconnected pieces, 4 splits every 3-connected piece further into
/// quasi-4-connected components.
pub fn decompose_to_level(g: &Arc<Graph>, level: u8) -> Result<TreeDecomposition> {
    decompose_with(g, level, Quasi4Options::default())
}

pub fn decompose(g: &Arc<Graph>) -> Result<TreeDecomposition> {
    decompose_to_level(g, 4)
}

pub fn decompose_with(g: &Arc<Graph>, level: u8, opts: Quasi4Options) -> Result<TreeDecomposition> {
    if !(2..=4).contains(&level) {
        return Err(Error::precondition(format!("decomposition level {level} is not 2, 3 or 4")));
    }
    let bic = biconnected_components(g);
    let mut d = Draft::from_decomposition(&bic);
    if level >= 3 {
        for i in 0..d.bags.len() {
            if d.class[i] != TorsoClass::Biconnected {
                continue;
            }
            let (sub, map) = g.induced_subgraph(&d.bags[i]);
            let tri = triconnected_draft(&sub).assemble(&sub);
            let mapped = map_draft(&tri, &map, None)?;
            d.replace(i, mapped)?;
        }
    }
    if level >= 4 {
        for i in 0..d.bags.len() {
            if !d.alive[i] || d.class[i] != TorsoClass::Triconnected {
                continue;
            }
            let x = d.bags[i].clone();
            let outer = torso_model_small_attachments(g, &x)?;
            let (torso, map) = g.torso(&x);
            let q = decompose_quasi4_with(&Arc::new(torso), opts)?;
            let mapped = map_draft(&q, &map, Some(&outer))?;
            d.replace(i, mapped)?;
        }
    }
    Ok(d.assemble(g))
}
