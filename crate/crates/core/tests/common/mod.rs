#![allow(dead_code)]

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use rrflow::graph::{DiffusionModel, Graph, VertexId};
use rrflow::oracle::check_enumerable;
use rrflow::sampling::{RRRStore, ReprPolicy};

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Random store over `n` vertices with `theta` sets. Most sets are small
/// lists; about one in twenty is dense enough to become a bitmap.
pub fn random_store(rng: &mut impl Rng, n: usize, theta: usize) -> RRRStore {
    let lists = (0..theta)
        .map(|_| {
            let size = if rng.random_bool(0.05) {
                rng.random_range((n / 64).max(1)..=n)
            } else {
                rng.random_range(1..=n.min(16))
            };
            index::sample(rng, n, size).into_iter().map(|v| v as VertexId).collect()
        })
        .collect();
    RRRStore::from_member_lists(n, lists, ReprPolicy::default())
}

/// Serial occurrence count over all sets.
pub fn recount(store: &RRRStore) -> Vec<u64> {
    let mut c = vec![0u64; store.num_vertices()];
    for s in store.iter() {
        s.for_each(|v| c[v as usize] += 1);
    }
    c
}

/// Random directed graph on `n` vertices with model-appropriate random
/// weights, redrawn until exact enumeration is allowed.
pub fn tiny_graph(rng: &mut impl Rng, n: usize, edge_prob: f64, model: DiffusionModel) -> Graph {
    loop {
        let mut edges = Vec::new();
        for u in 0..n as VertexId {
            for v in 0..n as VertexId {
                if u != v && rng.random_bool(edge_prob) {
                    edges.push((u, v, 1.0));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap().generate_weights(model, rng.random());
        if check_enumerable(&g, model).is_ok() {
            return g;
        }
    }
}
