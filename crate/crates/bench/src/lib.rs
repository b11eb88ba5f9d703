//! Fixtures shared by the benchmarks.

use dydap_core::workload::{RmatParams, RmatSampler};
use dydap_core::{AccessGraph, DnTree, DnTreeConfig, SerializedDnTree};

pub const SKEWED: [f64; 4] = [0.45, 0.25, 0.25, 0.05];

/// `n` transitions drawn from an R-MAT distribution over `2^depth` extents.
pub fn transitions(depth: u32, n: usize, seed: u64) -> Vec<(u64, u64)> {
    let mut sampler: RmatSampler = RmatParams::new(SKEWED, depth, seed).unwrap().sampler();
    (0..n).map(|_| sampler.sample_cell()).collect()
}

pub fn tree(depth: u32, t: u64, k: f64, pairs: &[(u64, u64)]) -> DnTree {
    let mut tree = DnTree::new(DnTreeConfig::new(1 << depth, t, k).unwrap());
    for &(a, b) in pairs {
        tree.record(a, b).unwrap();
    }
    tree
}

/// `parts` serialized trees over disjoint slices of one workload.
pub fn shards(depth: u32, parts: usize, per_part: usize) -> Vec<SerializedDnTree> {
    let pairs = transitions(depth, parts * per_part, 3);
    pairs
        .chunks(per_part)
        .map(|c| tree(depth, 16, 2.0, c).serialize())
        .collect()
}

/// Access graph of a reconstructed DN-tree matrix with `2^depth` vertices.
pub fn access_graph(depth: u32, accesses: usize) -> AccessGraph {
    let pairs = transitions(depth, accesses, 5);
    AccessGraph::from_matrix(&tree(depth, 4, 2.0, &pairs).reconstruct_matrix())
}
