//! Named graph families.
//!
//! Vertex numbering conventions (0-based):
//! * `th3`: v1..v4 = 0..3, w1..w3 = 4..6
//! * `tr3`: v1..v3 = 0..2, w1..w3 = 3..5
//! * `th4`: v1..v4 = 0..3, w1..w4 = 4..7
//! * `triconnected_example`: x1..x4 = 0..3, y1..y3 = 4..6

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

pub fn cube() -> Graph {
    Graph::new(8, (0..8).flat_map(|v| (0..3).map(move |d| (v, v ^ (1 << d))))).unwrap()
}

pub fn th3() -> Graph {
    let mut e: Vec<(Vertex, Vertex)> = complete(4).edges().collect();
    for (w, tri) in [(4, [0, 1, 2]), (5, [0, 1, 3]), (6, [0, 2, 3])] {
        e.extend(tri.iter().map(|&v| (w, v)));
    }
    Graph::new(7, e).unwrap()
}

pub fn tr3() -> Graph {
    let mut e = vec![(0, 1), (1, 2), (0, 2)];
    for w in 3..6 {
        e.extend((0..3).map(|v| (w, v)));
    }
    Graph::new(6, e).unwrap()
}

/// Dashed edges of TH4 in mask-bit order.
pub const TH4_DASHED: [(Vertex, Vertex); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// w-vertex of TH4 and the triple of v-vertices it sees.
pub const TH4_W: [(Vertex, [Vertex; 3]); 4] =
    [(4, [0, 1, 2]), (5, [0, 1, 3]), (6, [0, 2, 3]), (7, [1, 2, 3])];

pub fn th4(mask: u8) -> Result<Graph> {
    if mask >= 64 {
        return Err(Error::precondition(format!("th4 mask {mask} is not a 6-bit value")));
    }
    let mut e = Vec::new();
    for (w, tri) in TH4_W {
        e.extend(tri.iter().map(|&v| (w, v)));
    }
    e.extend(TH4_DASHED.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p));
    Graph::new(8, e)
}

/// Disjoint union of `a` and `b` with `b`-vertex `j` identified with
/// `a`-vertex `i` for each pair `(i, j)`. New vertices of `b` are
/// appended in ascending order.
pub fn glue(a: &Graph, b: &Graph, ident: &[(Vertex, Vertex)]) -> Result<Graph> {
    let mut map = vec![None; b.n()];
    for &(i, j) in ident {
        a.check_vertex(i)?;
        b.check_vertex(j)?;
        map[j] = Some(i);
    }
    let mut next = a.n();
    let map: Vec<Vertex> = map
        .into_iter()
        .map(|o| {
            o.unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Graph::new(next, a.edges().chain(b.edges().map(|(u, v)| (map[u], map[v]))))
}

/// Two copies of K5 sharing the triangle {2,3,4}; private pairs {0,1} and {5,6}.
pub fn glued_k5() -> Graph {
    glue(&complete(5), &complete(5), &[(2, 0), (3, 1), (4, 2)]).unwrap()
}

/// Cube with every vertex replaced by a triangle. Vertex `3v+d` is the
/// corner of cube vertex `v` facing direction `d`.
pub fn truncated_cube() -> Graph {
    let mut e = Vec::new();
    for v in 0..8 {
        e.extend([(3 * v, 3 * v + 1), (3 * v + 1, 3 * v + 2), (3 * v, 3 * v + 2)]);
        for d in 0..3 {
            let u = v ^ (1 << d);
            if v < u {
                e.push((3 * v + d, 3 * u + d));
            }
        }
    }
    Graph::new(24, e).unwrap()
}

/// A 2-connected graph whose triconnected components are one K4 and three
/// triangles.
pub fn triconnected_example() -> Graph {
    Graph::new(7, [(0, 1), (0, 2), (0, 3), (4, 1), (4, 2), (5, 2), (5, 3), (6, 3), (6, 1)]).unwrap()
}

/// Hexagonal grid made of all hexagons at hex distance below `radius` from
/// a central one (radius 2: 7 hexagons, radius 3: 19).
pub fn hex_grid(radius: usize) -> Result<Graph> {
    if radius == 0 {
        return Err(Error::precondition("hex grid radius must be positive"));
    }
    let r = radius as i64 - 1;
    // Triangular lattice coordinates; hexagon centres sit on the sublattice
    // generated by (1,1) and (2,-1), corners are the six lattice neighbours.
    let corners = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    let mut ids: BTreeMap<(i64, i64), Vertex> = BTreeMap::new();
    let mut hexes = Vec::new();
    for q in -r..=r {
        for s in -r..=r {
            if (q + s).abs() > r {
                continue;
            }
            let c = (q + 2 * s, q - s);
            let ring: Vec<(i64, i64)> = corners.iter().map(|&(dx, dy)| (c.0 + dx, c.1 + dy)).collect();
            for &p in &ring {
                ids.entry(p).or_insert(0);
            }
            hexes.push(ring);
        }
    }
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    let mut e = Vec::new();
    for ring in &hexes {
        for i in 0..6 {
            e.push((ids[&ring[i]], ids[&ring[(i + 1) % 6]]));
        }
    }
    Graph::new(ids.len(), e)
}

/// Resolves the generator names accepted on the command line.
pub fn by_name(name: &str) -> Result<Graph> {
    let bad = || Error::precondition(format!("unknown generator '{name}'"));
    match name {
        "cube" => Ok(cube()),
        "hex2" => hex_grid(2),
        "hex3" => hex_grid(3),
        "th3" => Ok(th3()),
        "tr3" => Ok(tr3()),
        "glued-k5" => Ok(glued_k5()),
        "truncated-cube" => Ok(truncated_cube()),
        "fig1" => Ok(triconnected_example()),
        _ => {
            if let Some(rest) = name.strip_prefix("th4:") {
                let mask = if rest == "full" { 63 } else { rest.parse::<u8>().map_err(|_| bad())? };
                th4(mask)
            } else if let Some(rest) = name.strip_prefix('k') {
                let n: usize = rest.parse().map_err(|_| bad())?;
                Ok(complete(n))
            } else if let Some(rest) = name.strip_prefix('c') {
                let n: usize = rest.parse().map_err(|_| bad())?;
                if n < 3 {
                    return Err(bad());
                }
                Ok(cycle(n))
            } else {
                Err(bad())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::are_isomorphic;

    #[test]
    fn sizes() {
        assert_eq!((th3().n(), th3().m()), (7, 15));
        assert_eq!((tr3().n(), tr3().m()), (6, 12));
        assert_eq!((cube().n(), cube().m()), (8, 12));
        assert_eq!((truncated_cube().n(), truncated_cube().m()), (24, 36));
        assert_eq!((glued_k5().n(), glued_k5().m()), (7, 17));
        let h2 = hex_grid(2).unwrap();
        assert_eq!((h2.n(), h2.m()), (24, 30));
        let h3 = hex_grid(3).unwrap();
        assert_eq!((h3.n(), h3.m()), (54, 72));
        assert_eq!(th4(63).unwrap().m(), 18);
    }

    #[test]
    fn th4_empty_mask_is_the_cube() {
        assert!(are_isomorphic(&th4(0).unwrap(), &cube()));
    }

    #[test]
    fn th4_full_without_w_is_k4() {
        let g = th4(63).unwrap();
        let (k, _) = g.induced_subgraph(&[0, 1, 2, 3].into());
        assert!(k.is_complete() && k.n() == 4);
    }

    #[test]
    fn names_resolve() {
        for n in ["cube", "hex2", "hex3", "th3", "tr3", "glued-k5", "truncated-cube", "k5", "th4:17", "th4:full", "c5", "fig1"] {
            assert!(by_name(n).is_ok(), "{n}");
        }
        assert!(by_name("th4:64").is_err());
        assert!(by_name("blob").is_err());
    }
}
