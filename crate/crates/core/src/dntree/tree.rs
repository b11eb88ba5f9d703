use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{valid_span, DnTreeConfig, DnTreeError, ExtentId, TransitionMatrix};

/// Arena node. `first_child == 0` marks a leaf: index 0 is always a root
/// child, so it can never start a child block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct Node {
    pub(super) count: u64,
    pub(super) first_child: u32,
}

/// Bytes charged per node by [`DnTree::stats`]: one `u64` counter plus a
/// `u32` child index, padded.
pub const NODE_BYTES: u64 = std::mem::size_of::<Node>() as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStats {
    pub node_count: u64,
    pub total_recorded: u64,
    pub memory_bytes: u64,
}

/// A leaf of the tree together with the reconstructed mass of its region.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRegion<W = f64> {
    pub row0: u64,
    pub col0: u64,
    /// Side of the (padded) square region.
    pub size: u64,
    /// Rows/columns of the region inside the extent space.
    pub valid_rows: u64,
    pub valid_cols: u64,
    pub mass: W,
}

impl<W> LeafRegion<W> {
    pub fn valid_area(&self) -> u64 {
        self.valid_rows * self.valid_cols
    }
}

/// Arithmetic used by reconstruction, so the same traversal runs in `f64`
/// and in exact rationals.
pub(crate) trait Weight: Clone {
    fn zero() -> Self;
    fn from_count(count: u64) -> Self;
    fn plus(&self, other: &Self) -> Self;
    /// `self * num / den`, evaluated left to right.
    fn scale(&self, num: u64, den: u64) -> Self;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_count(count: u64) -> Self {
        count as f64
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, num: u64, den: u64) -> Self {
        self * num as f64 / den as f64
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_count(count: u64) -> Self {
        BigRational::from_integer(BigInt::from(count))
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, num: u64, den: u64) -> Self {
        self * BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

#[inline]
fn quadrant(row: u64, col: u64, bit: u32) -> usize {
    ((((row >> bit) & 1) << 1) | ((col >> bit) & 1)) as usize
}

/// DN-tree over an extent space. Single writer; reads may be shared.
#[derive(Debug, Clone, PartialEq)]
pub struct DnTree {
    config: DnTreeConfig,
    thresholds: Vec<u64>,
    pub(super) nodes: Vec<Node>,
    total: u64,
}

impl DnTree {
    pub fn new(config: DnTreeConfig) -> Self {
        let thresholds = (0..=config.max_depth())
            .map(|l| config.threshold(l))
            .collect();
        Self {
            config,
            thresholds,
            nodes: vec![
                Node {
                    count: 0,
                    first_child: 0
                };
                4
            ],
            total: 0,
        }
    }

    /// Rebuilds a tree from a validated arena. `total` is recomputed.
    pub(super) fn from_nodes(config: DnTreeConfig, nodes: Vec<Node>) -> Result<Self, DnTreeError> {
        let mut tree = Self::new(config);
        tree.total = nodes
            .iter()
            .try_fold(0u64, |acc, n| acc.checked_add(n.count))
            .ok_or(DnTreeError::Overflow)?;
        tree.nodes = nodes;
        Ok(tree)
    }

    pub fn config(&self) -> &DnTreeConfig {
        &self.config
    }

    pub fn total_recorded(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Counters of the four root children in quadrant order.
    pub fn root_counters(&self) -> [u64; 4] {
        [0, 1, 2, 3].map(|q| self.nodes[q].count)
    }

    /// Records one access of `next` right after `prev`.
    pub fn record(&mut self, prev: ExtentId, next: ExtentId) -> Result<(), DnTreeError> {
        self.record_many(prev, next, 1)
    }

    /// Same as calling [`record`](Self::record) `times` times in a row.
    pub fn record_many(
        &mut self,
        prev: ExtentId,
        next: ExtentId,
        times: u64,
    ) -> Result<(), DnTreeError> {
        self.config.check(prev)?;
        self.config.check(next)?;
        if times == 0 {
            return Ok(());
        }
        let new_total = self.total.checked_add(times).ok_or(DnTreeError::Overflow)?;
        let depth = self.config.max_depth();
        let mut idx = quadrant(prev, next, depth - 1);
        let mut level = 1;
        let mut remaining = times;
        loop {
            if level == depth {
                let node = &mut self.nodes[idx];
                node.count = node
                    .count
                    .checked_add(remaining)
                    .ok_or(DnTreeError::Overflow)?;
                break;
            }
            let cap = self.thresholds[level as usize];
            let count = self.nodes[idx].count;
            if count < cap {
                let take = remaining.min(cap - count);
                self.nodes[idx].count += take;
                remaining -= take;
                if remaining == 0 {
                    break;
                }
            }
            let first = match self.nodes[idx].first_child {
                0 => self.grow(idx)?,
                f => f,
            };
            idx = first as usize + quadrant(prev, next, depth - level - 1);
            level += 1;
        }
        self.total = new_total;
        Ok(())
    }

    fn grow(&mut self, idx: usize) -> Result<u32, DnTreeError> {
        let first = u32::try_from(self.nodes.len()).map_err(|_| DnTreeError::Overflow)?;
        self.nodes.extend(std::iter::repeat_n(
            Node {
                count: 0,
                first_child: 0,
            },
            4,
        ));
        self.nodes[idx].first_child = first;
        Ok(first)
    }

    fn child_sum(&self, first: u32) -> u64 {
        let f = first as usize;
        self.nodes[f..f + 4].iter().map(|n| n.count).sum()
    }

    /// Children of a region of side `size` at `(row0, col0)` that overlap the
    /// extent space, as a bitmask over quadrants.
    fn valid_children(&self, row0: u64, col0: u64, size: u64) -> (u8, u64) {
        let half = size / 2;
        let m = self.config.extent_space();
        let mut mask = 0u8;
        for q in 0..4u64 {
            let r = row0 + (q >> 1) * half;
            let c = col0 + (q & 1) * half;
            if r < m && c < m {
                mask |= 1 << q;
            }
        }
        (mask, mask.count_ones() as u64)
    }

    /// Approximate `M^(row, col)`: the path walk from the root to the leaf
    /// covering the cell. Mass inherited from a saturated ancestor is split
    /// among its children in proportion to their counters (equally when the
    /// children are all zero), and a leaf spreads its mass evenly over the
    /// valid cells it covers.
    pub fn reconstruct_cell(&self, row: ExtentId, col: ExtentId) -> Result<f64, DnTreeError> {
        self.config.check(row)?;
        self.config.check(col)?;
        let depth = self.config.max_depth();
        let m = self.config.extent_space();
        let mut idx = quadrant(row, col, depth - 1);
        let mut level = 1;
        let mut acc = 0.0f64;
        loop {
            let node = self.nodes[idx];
            acc = acc.plus(&f64::from_count(node.count));
            let shift = depth - level;
            let size = 1u64 << shift;
            let row0 = (row >> shift) << shift;
            let col0 = (col >> shift) << shift;
            if node.first_child == 0 {
                let area = valid_span(row0, size, m) * valid_span(col0, size, m);
                return Ok(acc / area as f64);
            }
            let q = quadrant(row, col, shift - 1);
            let sum = self.child_sum(node.first_child);
            acc = if sum > 0 {
                acc.scale(self.nodes[node.first_child as usize + q].count, sum)
            } else {
                let (_, n) = self.valid_children(row0, col0, size);
                acc.scale(1, n)
            };
            idx = node.first_child as usize + q;
            level += 1;
        }
    }

    pub(crate) fn visit_leaves<W: Weight>(&self, mut f: impl FnMut(LeafRegion<W>)) {
        let half = self.config.side() / 2;
        for q in 0..4u64 {
            let (r, c) = ((q >> 1) * half, (q & 1) * half);
            self.visit(q as usize, 1, r, c, W::zero(), &mut f);
        }
    }

    fn visit<W: Weight>(
        &self,
        idx: usize,
        level: u32,
        row0: u64,
        col0: u64,
        inherited: W,
        f: &mut impl FnMut(LeafRegion<W>),
    ) {
        let node = self.nodes[idx];
        let acc = inherited.plus(&W::from_count(node.count));
        let size = 1u64 << (self.config.max_depth() - level);
        let m = self.config.extent_space();
        if node.first_child == 0 {
            f(LeafRegion {
                row0,
                col0,
                size,
                valid_rows: valid_span(row0, size, m),
                valid_cols: valid_span(col0, size, m),
                mass: acc,
            });
            return;
        }
        let sum = self.child_sum(node.first_child);
        let (mask, n_valid) = self.valid_children(row0, col0, size);
        let half = size / 2;
        for q in 0..4u64 {
            let child = node.first_child as usize + q as usize;
            let share = if sum > 0 {
                acc.scale(self.nodes[child].count, sum)
            } else if mask & (1 << q) != 0 {
                acc.scale(1, n_valid)
            } else {
                W::zero()
            };
            let (r, c) = (row0 + (q >> 1) * half, col0 + (q & 1) * half);
            self.visit(child, level + 1, r, c, share, f);
        }
    }

    /// Leaf regions with their reconstructed `f64` mass, in preorder.
    pub fn leaves(&self) -> Vec<LeafRegion> {
        let mut out = Vec::new();
        self.visit_leaves::<f64>(|leaf| out.push(leaf));
        out
    }

    /// Unrounded `M^` over the `extent_space x extent_space` matrix.
    pub fn reconstruct_matrix(&self) -> TransitionMatrix {
        let side = self.config.extent_space() as usize;
        let mut out = TransitionMatrix::zeros(side);
        self.visit_leaves::<f64>(|leaf| {
            let area = leaf.valid_area();
            if area == 0 {
                return;
            }
            let value = leaf.mass / area as f64;
            for r in leaf.row0..leaf.row0 + leaf.valid_rows {
                for c in leaf.col0..leaf.col0 + leaf.valid_cols {
                    out.set(r as usize, c as usize, value);
                }
            }
        });
        out
    }

    /// `M^` in exact rational arithmetic, row-major. Meant for small extent
    /// spaces (the output is dense).
    pub fn reconstruct_matrix_exact(&self) -> Vec<Vec<BigRational>> {
        let side = self.config.extent_space() as usize;
        let mut out = vec![vec![<BigRational as Zero>::zero(); side]; side];
        self.visit_leaves::<BigRational>(|leaf| {
            let area = leaf.valid_area();
            if area == 0 {
                return;
            }
            let value = leaf.mass.scale(1, area);
            for r in leaf.row0..leaf.row0 + leaf.valid_rows {
                for c in leaf.col0..leaf.col0 + leaf.valid_cols {
                    out[r as usize][c as usize] = value.clone();
                }
            }
        });
        out
    }

    pub fn stats(&self) -> TreeStats {
        let node_count = self.nodes.len() as u64;
        TreeStats {
            node_count,
            total_recorded: self.total,
            memory_bytes: node_count * NODE_BYTES,
        }
    }

    /// True when no counter above the leaf level exceeds its threshold, which
    /// holds for every tree built by `record` alone.
    pub fn within_thresholds(&self) -> bool {
        let depth = self.config.max_depth();
        let mut stack: Vec<(usize, u32)> = (0..4).map(|q| (q, 1)).collect();
        while let Some((idx, level)) = stack.pop() {
            let node = self.nodes[idx];
            if level < depth && node.count > self.thresholds[level as usize] {
                return false;
            }
            if node.first_child != 0 {
                stack.extend((0..4).map(|q| (node.first_child as usize + q, level + 1)));
            }
        }
        true
    }
}
