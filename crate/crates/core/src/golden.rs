//! Reference worked examples with known answers, shared by tests and the CLI.

use crate::simulator::{ExtentTrace, Handoff};

/// Four extents, replayed with `t = 4`, `k = 1`.
pub const EXTENTS: u64 = 4;
pub const BASE_THRESHOLD: u64 = 4;
pub const GROWTH_FACTOR: f64 = 1.0;

pub const SEQUENCE: [u64; 44] = [
    1, 2, 1, 3, 0, 1, 3, 1, 0, 1, 0, 2, 1, 3, 1, 3, 0, 2, 1, 0, 2, 1, 3, 0, 3, 0, 1, 0, 1, 3, 1, 3,
    1, 2, 0, 1, 3, 1, 3, 1, 2, 1, 2, 1,
];

/// Exact transition counts of [`SEQUENCE`].
pub const EXACT: [[i64; 4]; 4] = [[0, 5, 3, 1], [4, 0, 4, 9], [1, 6, 0, 0], [4, 6, 0, 0]];

/// Reconstruction of [`SEQUENCE`], rounded half up.
pub const RECONSTRUCTED: [[i64; 4]; 4] = [[0, 5, 3, 1], [4, 0, 4, 9], [1, 5, 0, 0], [4, 7, 0, 0]];

/// `EXACT + EXACT^T`.
pub const ADJACENCY: [[i64; 4]; 4] = [[0, 9, 4, 5], [9, 0, 10, 15], [4, 10, 0, 0], [5, 15, 0, 0]];

/// The three balanced two-way splits of four vertices, as assignments.
pub const SPLITS: [[usize; 4]; 3] = [[0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0]];

/// Edge cut of each split on the exact and on the reconstructed graph.
pub const CUTS_EXACT: [f64; 3] = [34.0, 24.0, 28.0];
pub const CUTS_RECONSTRUCTED: [f64; 3] = [34.0, 23.0, 29.0];

/// Minimum-cut balanced split for both graphs: {0, 2} | {1, 3}.
pub const OPTIMAL: [usize; 4] = [0, 1, 0, 1];

/// Two phases over four extents: extents 0 and 1 strictly before 2 and 3,
/// each of the first pair handing off to each of the second.
pub fn two_phase_trace() -> ExtentTrace {
    let h = |src, dst| Handoff {
        src,
        dst,
        messages: 1,
    };
    ExtentTrace {
        phases: vec![vec![(0, 1), (1, 1)], vec![(2, 1), (3, 1)]],
        boundaries: vec![vec![h(0, 2), h(0, 3), h(1, 2), h(1, 3)]],
        edges_traversed: 4,
    }
}

/// Placements for [`two_phase_trace`] on two nodes with their (compute
/// time, network units): grouping by phase serializes the work, pairing
/// across phases runs it in parallel.
pub const TWO_PHASE_PLACEMENTS: [([u32; 4], f64, u64); 2] =
    [([0, 0, 1, 1], 4.0, 2), ([0, 1, 0, 1], 2.0, 2)];
