//! Transition workloads: R-MAT cell streams, access-sequence replay and the
//! compression error of a DN-tree against the exact matrix.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded explicitly, so every
//! stream is reproducible from its seed.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::GrowthSample;
use crate::dntree::{DnTree, DnTreeConfig, DnTreeError, ExtentId, TransitionMatrix};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid R-MAT probabilities {0:?}: need four positive values summing to 1")]
    InvalidProbabilities([f64; 4]),
    #[error("R-MAT depth {0} out of range (0..=31)")]
    InvalidDepth(u32),
    #[error("matrix dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("error metric needs at least 2 accesses, got {0}")]
    TooFewAccesses(u64),
    #[error("extent id {id} out of range for {extent_space} extents")]
    OutOfRange { id: ExtentId, extent_space: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Tree(#[from] DnTreeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Quadrant probabilities of an R-MAT model, in the DN-tree's quadrant
/// order (row-low/col-low, row-low/col-high, row-high/col-low,
/// row-high/col-high).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    p: [f64; 4],
    depth: u32,
    seed: u64,
}

impl RmatParams {
    pub fn new(p: [f64; 4], depth: u32, seed: u64) -> Result<Self, WorkloadError> {
        validate_probabilities(&p)?;
        if depth > 31 {
            return Err(WorkloadError::InvalidDepth(depth));
        }
        Ok(Self { p, depth, seed })
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn side(&self) -> u64 {
        1 << self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> RmatSampler {
        RmatSampler::new(*self)
    }
}

pub(crate) fn validate_probabilities(p: &[f64; 4]) -> Result<(), WorkloadError> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| x <= 0.0 || !x.is_finite()) || (sum - 1.0).abs() > 1e-12 {
        return Err(WorkloadError::InvalidProbabilities(*p));
    }
    Ok(())
}

/// Seeded stream of R-MAT matrix cells.
#[derive(Debug, Clone)]
pub struct RmatSampler {
    cumulative: [f64; 3],
    depth: u32,
    rng: ChaCha8Rng,
}

impl RmatSampler {
    pub fn new(params: RmatParams) -> Self {
        let p = params.p;
        Self {
            cumulative: [p[0], p[0] + p[1], p[0] + p[1] + p[2]],
            depth: params.depth,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
        }
    }

    /// Draws a cell by picking one of four quadrants `depth` times.
    pub fn sample_cell(&mut self) -> (u64, u64) {
        let (mut row, mut col) = (0u64, 0u64);
        for _ in 0..self.depth {
            let u: f64 = self.rng.random();
            let q = if u < self.cumulative[0] {
                0
            } else if u < self.cumulative[1] {
                1
            } else if u < self.cumulative[2] {
                2
            } else {
                3
            };
            row = (row << 1) | (q >> 1);
            col = (col << 1) | (q & 1);
        }
        (row, col)
    }
}

impl Iterator for RmatSampler {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.sample_cell())
    }
}

/// Ordered extent accesses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessSequence(pub Vec<ExtentId>);

impl AccessSequence {
    pub fn new(ids: Vec<ExtentId>) -> Self {
        Self(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Consecutive `(previous, next)` pairs.
    pub fn transitions(&self) -> impl Iterator<Item = (ExtentId, ExtentId)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn check_range(&self, extent_space: u64) -> Result<(), WorkloadError> {
        match self.0.iter().find(|&&id| id >= extent_space) {
            Some(&id) => Err(WorkloadError::OutOfRange { id, extent_space }),
            None => Ok(()),
        }
    }

    /// Reads one extent id per line; blank lines and `#` comments are skipped.
    pub fn read_from(reader: impl BufRead) -> Result<Self, WorkloadError> {
        let mut ids = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let id = text.parse().map_err(|e| WorkloadError::Parse {
                line: i + 1,
                msg: format!("{e}: {text:?}"),
            })?;
            ids.push(id);
        }
        Ok(Self(ids))
    }

    pub fn write_to(&self, mut writer: impl Write) -> std::io::Result<()> {
        for id in &self.0 {
            writeln!(writer, "{id}")?;
        }
        Ok(())
    }
}

/// Feeds every consecutive pair of `seq` into both the tree and the exact
/// matrix. Self-transitions are recorded like any other pair. Returns the
/// number of transitions, `|seq| - 1` (or 0).
pub fn replay(
    seq: &AccessSequence,
    tree: &mut DnTree,
    oracle: &mut TransitionMatrix,
) -> Result<u64, WorkloadError> {
    let m = tree.config().extent_space();
    seq.check_range(m)?;
    if oracle.side() as u64 != m {
        return Err(WorkloadError::DimensionMismatch(oracle.side(), m as usize));
    }
    let mut updates = 0;
    for (a, b) in seq.transitions() {
        tree.record(a, b)?;
        oracle.add(a as usize, b as usize, 1.0);
        updates += 1;
    }
    Ok(updates)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Normalized L1 discrepancy, in `[0, 1]`.
    pub error: f64,
    /// Number of accesses `N` (transitions + 1).
    pub accesses: u64,
    pub matrix_side: usize,
}

/// `sum |m_ij - m^_ij| / (2 (N - 1))`.
pub fn compression_error(
    exact: &TransitionMatrix,
    approx: &TransitionMatrix,
    accesses: u64,
) -> Result<ErrorReport, WorkloadError> {
    if exact.side() != approx.side() {
        return Err(WorkloadError::DimensionMismatch(
            exact.side(),
            approx.side(),
        ));
    }
    if accesses < 2 {
        return Err(WorkloadError::TooFewAccesses(accesses));
    }
    let l1: f64 = exact
        .cells()
        .iter()
        .zip(approx.cells())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(ErrorReport {
        error: (l1 / (2.0 * (accesses - 1) as f64)).clamp(0.0, 1.0),
        accesses,
        matrix_side: exact.side(),
    })
}

/// Sparse exact transition counts, for extent spaces too large to hold a
/// dense matrix twice.
#[derive(Debug, Clone, Default)]
pub struct CellCounts {
    counts: BTreeMap<(u64, u64), u64>,
    total: u64,
}

impl CellCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, row: u64, col: u64) {
        *self.counts.entry((row, col)).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, row: u64, col: u64) -> u64 {
        self.counts.get(&(row, col)).copied().unwrap_or(0)
    }

    pub fn to_matrix(&self, side: usize) -> TransitionMatrix {
        let mut m = TransitionMatrix::zeros(side);
        for (&(r, c), &v) in &self.counts {
            m.add(r as usize, c as usize, v as f64);
        }
        m
    }
}

/// Compression error of `tree` against sparse exact counts, computed leaf by
/// leaf without materializing `M^`. Within a leaf every valid cell holds the
/// same reconstructed value `v`, so the L1 term is the sum over its nonzero
/// exact cells plus `v` times the number of zero cells.
pub fn tree_compression_error(
    tree: &DnTree,
    exact: &CellCounts,
) -> Result<ErrorReport, WorkloadError> {
    let accesses = exact.total + 1;
    if accesses < 2 {
        return Err(WorkloadError::TooFewAccesses(accesses));
    }
    let side = tree.config().extent_space() as usize;
    // Bucket exact cells by the leaf that covers them.
    let leaves = tree.leaves();
    let locate = leaf_locator(tree);
    let mut per_leaf: Vec<(f64, u64)> = vec![(0.0, 0); leaves.len()];
    for (&(r, c), &count) in &exact.counts {
        let li = locate(r, c);
        let leaf = &leaves[li];
        let v = leaf.mass / leaf.valid_area() as f64;
        per_leaf[li].0 += (count as f64 - v).abs();
        per_leaf[li].1 += 1;
    }
    let mut l1 = 0.0;
    for (leaf, (sum, nonzero)) in leaves.iter().zip(per_leaf) {
        let area = leaf.valid_area();
        if area == 0 {
            continue;
        }
        let v = leaf.mass / area as f64;
        l1 += sum + v * (area - nonzero) as f64;
    }
    Ok(ErrorReport {
        error: (l1 / (2.0 * (accesses - 1) as f64)).clamp(0.0, 1.0),
        accesses,
        matrix_side: side,
    })
}

/// Compression error for each growth factor on one shared seeded stream of
/// `accesses - 1` transitions drawn from `params`.
pub fn error_sweep(
    params: &RmatParams,
    growth_factors: &[f64],
    base_threshold: u64,
    accesses: u64,
) -> Result<Vec<ErrorReport>, WorkloadError> {
    if accesses < 2 {
        return Err(WorkloadError::TooFewAccesses(accesses));
    }
    let cells: Vec<(u64, u64)> = params.sampler().take((accesses - 1) as usize).collect();
    let mut exact = CellCounts::new();
    for &(r, c) in &cells {
        exact.add(r, c);
    }
    growth_factors
        .iter()
        .map(|&k| {
            let config = DnTreeConfig::new(params.side(), base_threshold, k)?;
            let mut tree = DnTree::new(config);
            for &(r, c) in &cells {
                tree.record(r, c)?;
            }
            tree_compression_error(&tree, &exact)
        })
        .collect()
}

/// Node count of one tree fed a seeded stream, sampled when the number of
/// accesses `N` (transitions + 1) reaches each checkpoint.
pub fn measure_growth(
    params: &RmatParams,
    growth_factor: f64,
    base_threshold: u64,
    checkpoints: &[u64],
) -> Result<GrowthSample, WorkloadError> {
    let config = DnTreeConfig::new(params.side(), base_threshold, growth_factor)?;
    let mut tree = DnTree::new(config);
    let mut sampler = params.sampler();
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut accesses = 1;
    for &n in checkpoints {
        while accesses < n {
            let (r, c) = sampler.sample_cell();
            tree.record(r, c)?;
            accesses += 1;
        }
        points.push((n, tree.stats().node_count));
    }
    Ok(GrowthSample::new(points))
}

/// Maps a cell to the preorder index of its leaf in `tree.leaves()`.
fn leaf_locator(tree: &DnTree) -> impl Fn(u64, u64) -> usize {
    let leaves = tree.leaves();
    let mut index: HashMap<(u64, u64, u64), usize> = HashMap::with_capacity(leaves.len());
    for (i, l) in leaves.iter().enumerate() {
        index.insert((l.row0, l.col0, l.size), i);
    }
    let depth = tree.config().max_depth();
    move |r, c| {
        for shift in 0..depth {
            let size = 1u64 << shift;
            let key = ((r >> shift) << shift, (c >> shift) << shift, size);
            if let Some(&i) = index.get(&key) {
                return i;
            }
        }
        unreachable!("every cell is covered by a leaf")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_probabilities() {
        assert!(RmatParams::new([0.5, 0.5, 0.0, 0.0], 3, 1).is_err());
        assert!(RmatParams::new([0.3, 0.3, 0.3, 0.3], 3, 1).is_err());
        assert!(RmatParams::new([0.25; 4], 32, 1).is_err());
    }

    #[test]
    fn degenerate_corner() {
        let eps = 1e-12;
        let p = RmatParams::new([1.0 - 3.0 * eps, eps, eps, eps], 10, 5).unwrap();
        assert!(p.sampler().take(1000).all(|c| c == (0, 0)));
    }

    #[test]
    fn same_seed_same_stream() {
        let p = RmatParams::new([0.45, 0.25, 0.25, 0.05], 9, 42).unwrap();
        let a: Vec<_> = p.sampler().take(100).collect();
        let b: Vec<_> = p.sampler().take(100).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|&(r, c)| r < 512 && c < 512));
    }

    #[test]
    fn sequence_text_round_trip() {
        let seq = AccessSequence::new(vec![3, 1, 4, 1, 5]);
        let mut buf = Vec::new();
        seq.write_to(&mut buf).unwrap();
        let back = AccessSequence::read_from(&buf[..]).unwrap();
        assert_eq!(back, seq);
        let err = AccessSequence::read_from(&b"1\nx\n"[..]).unwrap_err();
        assert!(matches!(err, WorkloadError::Parse { line: 2, .. }));
    }

    #[test]
    fn replay_of_single_access_is_noop() {
        let mut tree = DnTree::new(DnTreeConfig::new(4, 4, 1.0).unwrap());
        let mut m = TransitionMatrix::zeros(4);
        assert_eq!(
            replay(&AccessSequence::new(vec![2]), &mut tree, &mut m).unwrap(),
            0
        );
        assert!(tree.is_empty());
        let bad = AccessSequence::new(vec![1, 9]);
        assert!(replay(&bad, &mut tree, &mut m).is_err());
    }

    #[test]
    fn error_metric_edges() {
        let a = TransitionMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        let b = TransitionMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(compression_error(&a, &a, 3).unwrap().error, 0.0);
        assert_eq!(compression_error(&a, &b, 3).unwrap().error, 1.0);
        assert_eq!(
            compression_error(&a, &b, 3).unwrap().error,
            compression_error(&b, &a, 3).unwrap().error
        );
        assert!(compression_error(&a, &b, 1).is_err());
        assert!(compression_error(&a, &TransitionMatrix::zeros(3), 3).is_err());
    }

    #[test]
    fn sparse_error_matches_dense() {
        let cfg = DnTreeConfig::new(64, 3, 1.5).unwrap();
        let mut tree = DnTree::new(cfg);
        let mut counts = CellCounts::new();
        let p = RmatParams::new([0.45, 0.25, 0.25, 0.05], 6, 9).unwrap();
        for (r, c) in p.sampler().take(5000) {
            tree.record(r, c).unwrap();
            counts.add(r, c);
        }
        let dense = compression_error(&counts.to_matrix(64), &tree.reconstruct_matrix(), 5001)
            .unwrap()
            .error;
        let sparse = tree_compression_error(&tree, &counts).unwrap().error;
        assert!(dense > 0.0);
        assert!((dense - sparse).abs() < 1e-12, "{dense} vs {sparse}");
    }

    #[test]
    fn sweep_exact_cases() {
        let p = RmatParams::new([0.3, 0.25, 0.25, 0.2], 5, 3).unwrap();
        for r in error_sweep(&p, &[1.5, 8.0], 0, 2000).unwrap() {
            assert_eq!(r.error, 0.0);
        }
        let single = RmatParams::new([0.3, 0.25, 0.25, 0.2], 0, 3).unwrap();
        let r = error_sweep(&single, &[2.0], 16, 500).unwrap();
        assert_eq!(r[0].error, 0.0);
        assert_eq!(r[0].matrix_side, 1);
    }

    #[test]
    fn growth_checkpoints() {
        let p = RmatParams::new([0.45, 0.25, 0.25, 0.05], 12, 1).unwrap();
        let g = measure_growth(&p, 2.0, 4, &[10, 100, 1000, 10_000]).unwrap();
        assert_eq!(g.points.len(), 4);
        assert!(g.points.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
