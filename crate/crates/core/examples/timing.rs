//! Times `decompose` on seeded random 3-connected graphs with m ≈ 3n.

use std::sync::Arc;
use std::time::Instant;

use q4dec::decomposition::decompose;
use q4dec::random::{random_3connected_sparse, rng};

fn main() {
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let sizes = if sizes.is_empty() { vec![250, 500, 1000, 2000] } else { sizes };
    for n in sizes {
        let g = Arc::new(random_3connected_sparse(n, 3 * n / 2, &mut rng(n as u64)));
        let start = Instant::now();
        let td = decompose(&g).expect("decomposition");
        println!("n={n} m={} nodes={} time={:.3}s", g.m(), td.len(), start.elapsed().as_secs_f64());
    }
}
