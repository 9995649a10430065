//! Seeded random graph families for fuzzing, acceptance runs and timing.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::generators::glue;
use crate::graph::{Graph, Vertex};
use crate::mincut::is_k_connected;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph: a random spanning tree plus each other pair with
/// probability `p`.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i], order[j]));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("vertices in range")
}

/// Hamiltonian cycle, a perfect matching and `extra` random edges on a
/// random vertex order, retried until 3-connected. Needs n ≥ 4.
pub fn random_3connected_sparse<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Graph {
    assert!(n >= 4, "random 3-connected graphs need at least 4 vertices");
    loop {
        let mut order: Vec<Vertex> = (0..n).collect();
        order.shuffle(rng);
        let mut edges: Vec<(Vertex, Vertex)> = (0..n).map(|i| (order[i], order[(i + 1) % n])).collect();
        let mut perm = order.clone();
        perm.shuffle(rng);
        edges.extend(perm.chunks_exact(2).map(|c| (c[0], c[1])).filter(|&(a, b)| a != b));
        if n % 2 == 1 {
            let last = perm[n - 1];
            let other = perm[rng.gen_range(0..n - 1)];
            edges.push((last, other));
        }
        for _ in 0..extra {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                edges.push((u, v));
            }
        }
        let g = Graph::new(n, edges).expect("vertices in range");
        if is_k_connected(&g, 3) {
            return g;
        }
    }
}

/// Dense random graph G(n, p) retried until 3-connected.
pub fn random_3connected_dense<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    assert!(n >= 4, "random 3-connected graphs need at least 4 vertices");
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, edges).expect("vertices in range");
        if is_k_connected(&g, 3) {
            return g;
        }
    }
}

/// Replaces vertex `v` of degree 3 by a triangle, one corner per neighbour.
pub fn truncate_vertex(g: &Graph, v: Vertex) -> Option<Graph> {
    let nb = g.neighbors(v).to_vec();
    if nb.len() != 3 {
        return None;
    }
    let n = g.n();
    let corner = |i: usize| if i == 0 { v } else { n + i - 1 };
    let mut edges: Vec<(Vertex, Vertex)> = g.edges().filter(|&(a, b)| a != v && b != v).collect();
    for (i, &u) in nb.iter().enumerate() {
        edges.push((corner(i), u));
    }
    edges.extend([(corner(0), corner(1)), (corner(1), corner(2)), (corner(0), corner(2))]);
    Graph::new(n + 2, edges).ok()
}

/// Random 3-connected graph on 4..=max_n vertices drawn from a mix of
/// families: dense random graphs, sparse cubic-plus-chords graphs, pieces
/// glued along three vertices, and graphs with degree-3 vertices blown up
/// into triangles.
pub fn random_small_3connected<R: Rng>(max_n: usize, rng: &mut R) -> Graph {
    assert!(max_n >= 5, "need room for at least five vertices");
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(5..=max_n);
            random_3connected_dense(n, rng.gen_range(0.35..0.8), rng)
        }
        1 => {
            let n = rng.gen_range(5..=max_n);
            let extra = rng.gen_range(0..=n / 2);
            random_3connected_sparse(n, extra, rng)
        }
        2 => {
            let mut g = random_3connected_dense(rng.gen_range(4..=6.min(max_n)), rng.gen_range(0.5..1.0), rng);
            while g.n() + 2 <= max_n {
                let size = rng.gen_range(4..=(max_n - g.n() + 3).min(7));
                let piece = random_3connected_dense(size, rng.gen_range(0.5..1.0), rng);
                let mut host: Vec<Vertex> = (0..g.n()).collect();
                host.shuffle(rng);
                let mut guest: Vec<Vertex> = (0..piece.n()).collect();
                guest.shuffle(rng);
                let ident: Vec<(Vertex, Vertex)> = host.iter().zip(&guest).take(3).map(|(&a, &b)| (a, b)).collect();
                g = glue(&g, &piece, &ident).expect("glue vertices in range");
                if rng.gen_bool(0.3) {
                    break;
                }
            }
            g
        }
        _ => {
            let n = rng.gen_range(4..=(max_n - 2).max(4));
            let mut g = random_3connected_sparse(n, rng.gen_range(0..=2), rng);
            while g.n() + 2 <= max_n {
                let cubic: Vec<Vertex> = g.vertices().filter(|&v| g.degree(v) == 3).collect();
                let Some(&v) = cubic.choose(rng) else { break };
                g = truncate_vertex(&g, v).expect("degree checked");
                if rng.gen_bool(0.4) {
                    break;
                }
            }
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_3connected_and_seeded() {
        let mut a = rng(7);
        let mut b = rng(7);
        for _ in 0..60 {
            let g = random_small_3connected(12, &mut a);
            let h = random_small_3connected(12, &mut b);
            assert!(g.n() <= 12 && is_k_connected(&g, 3), "{g:?}");
            assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
        }
        let g = random_connected(10, 0.1, &mut a);
        assert!(g.is_connected());
    }

    #[test]
    fn truncation_keeps_3connectivity() {
        let cube = crate::generators::cube();
        let t = truncate_vertex(&cube, 0).unwrap();
        assert_eq!(t.n(), 10);
        assert!(is_k_connected(&t, 3));
    }
}
