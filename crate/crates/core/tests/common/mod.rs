//! Graph corpus shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use q4dec::fuzz::instance;
use q4dec::generators::by_name;
use q4dec::random::{random_connected, rng};
use q4dec::Graph;
use rand::Rng;

pub const RANDOM_SEED: u64 = 0;

pub fn named() -> Vec<(String, Arc<Graph>)> {
    let mut names: Vec<String> = ["k4", "k5", "k6", "k7", "c5", "c6", "cube", "hex2", "hex3", "th3", "tr3", "glued-k5", "truncated-cube", "fig1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((0..64).map(|m| format!("th4:{m}")));
    names.into_iter().map(|n| {
        let g = by_name(&n).unwrap();
        (n, Arc::new(g))
    }).collect()
}

/// Seeded random 3-connected graphs on at most `max_n` vertices.
pub fn random_3connected(count: usize, max_n: usize) -> Vec<(String, Arc<Graph>)> {
    (0..count).map(|i| (format!("random3c-{i}"), Arc::new(instance(RANDOM_SEED, max_n, i)))).collect()
}

/// Seeded random connected graphs on 2..=max_n vertices with varied density.
pub fn random_connected_graphs(count: usize, max_n: usize) -> Vec<(String, Arc<Graph>)> {
    let mut r = rng(RANDOM_SEED + 1);
    (0..count)
        .map(|i| {
            let n = r.gen_range(2..=max_n);
            let p = r.gen_range(0.0..0.7);
            (format!("connected-{i}"), Arc::new(random_connected(n, p, &mut r)))
        })
        .collect()
}
