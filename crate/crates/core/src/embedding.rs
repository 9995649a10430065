//! Backtracking subgraph embedding for small patterns.

use crate::graph::{Graph, Vertex};

/// An injective map `V(g) -> V(p)` sending edges to edges, i.e. a witness
/// that `g` is isomorphic to a subgraph of `p`. First hit in ascending
/// order of candidate images.
pub fn find_embedding(g: &Graph, p: &Graph) -> Option<Vec<Vertex>> {
    if g.n() > p.n() || g.m() > p.m() {
        return None;
    }
    // Place vertices in an order where each one (after the first of its
    // component) already has a placed neighbour, highest degree first.
    let mut order = Vec::with_capacity(g.n());
    let mut placed = vec![false; g.n()];
    while order.len() < g.n() {
        let start = (0..g.n()).filter(|&v| !placed[v]).max_by_key(|&v| (g.degree(v), usize::MAX - v)).unwrap();
        placed[start] = true;
        order.push(start);
        let mut i = order.len() - 1;
        while i < order.len() {
            let mut next: Vec<Vertex> = g.neighbors(order[i]).iter().copied().filter(|&u| !placed[u]).collect();
            next.sort_by_key(|&u| (usize::MAX - g.degree(u), u));
            for u in next {
                if !placed[u] {
                    placed[u] = true;
                    order.push(u);
                }
            }
            i += 1;
        }
    }
    let mut image = vec![usize::MAX; g.n()];
    let mut used = vec![false; p.n()];
    if extend(g, p, &order, 0, &mut image, &mut used) {
        Some(image)
    } else {
        None
    }
}

fn extend(g: &Graph, p: &Graph, order: &[Vertex], i: usize, image: &mut [Vertex], used: &mut [bool]) -> bool {
    if i == order.len() {
        return true;
    }
    let v = order[i];
    for c in 0..p.n() {
        if used[c] || p.degree(c) < g.degree(v) {
            continue;
        }
        let ok = g.neighbors(v).iter().all(|&u| image[u] == usize::MAX || p.adjacent(image[u], c));
        if !ok {
            continue;
        }
        image[v] = c;
        used[c] = true;
        if extend(g, p, order, i + 1, image, used) {
            return true;
        }
        used[c] = false;
        image[v] = usize::MAX;
    }
    false
}

pub fn are_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.n() != b.n() || a.m() != b.m() {
        return false;
    }
    let mut da: Vec<usize> = a.vertices().map(|v| a.degree(v)).collect();
    let mut db: Vec<usize> = b.vertices().map(|v| b.degree(v)).collect();
    da.sort_unstable();
    db.sort_unstable();
    da == db && find_embedding(a, b).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::*;

    #[test]
    fn k4_into_th3() {
        let e = find_embedding(&complete(4), &th3()).unwrap();
        let mut img = e.clone();
        img.sort();
        assert_eq!(img, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k5_not_in_th3() {
        assert!(find_embedding(&complete(5), &th3()).is_none());
    }

    #[test]
    fn tr3_into_itself() {
        let e = find_embedding(&tr3(), &tr3()).unwrap();
        for (u, v) in tr3().edges() {
            assert!(tr3().adjacent(e[u], e[v]));
        }
    }

    #[test]
    fn relabelled_graphs_are_isomorphic() {
        let g = truncated_cube();
        let perm: Vec<usize> = (0..24).map(|i| (i * 5) % 24).collect();
        assert!(are_isomorphic(&g, &g.relabel(&perm)));
        assert!(!are_isomorphic(&cube(), &th4(1).unwrap()));
    }
}
