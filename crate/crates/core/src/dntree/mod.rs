//! Lossy quadtree summary of the extent-transition matrix.
//!
//! A [`DnTree`] approximates the `m x m` matrix whose cell `(a, b)` counts how
//! often extent `b` was accessed right after extent `a`. Every vertex except
//! the root owns a counter for one quadrant of the matrix. A counter at level
//! `i` saturates at `ceil(t * k^i)`; further updates in that quadrant are
//! pushed to four lazily created children, so hot regions get more detail
//! than cold ones.
//!
//! ```text
//!            root (no counter)
//!     +--------+--------+
//!     |   q0   |   q1   |   q0 = rows low,  cols low
//!     +--------+--------+   q1 = rows low,  cols high
//!     |   q2   |   q3   |   q2 = rows high, cols low
//!     +--------+--------+   q3 = rows high, cols high
//! ```
//!
//! Trees are shipped between nodes in a preorder `(count, marker)` encoding
//! ([`SerializedDnTree`]) and merged with [`join`] / [`aggregate`].

mod matrix;
mod serial;
mod tree;

pub use matrix::TransitionMatrix;
pub use serial::{aggregate, join, Aggregation, Entry, SerializedDnTree, WIRE_MAGIC};
pub use tree::{DnTree, LeafRegion, TreeStats, NODE_BYTES};

use thiserror::Error;

/// Extent identifier.
pub type ExtentId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DnTreeError {
    #[error("extent id {id} out of range (extent space is {extent_space})")]
    OutOfRange { id: ExtentId, extent_space: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("configuration mismatch between trees")]
    ConfigMismatch,
    #[error("malformed serialized tree: {0}")]
    Malformed(String),
    #[error("cannot aggregate an empty list of trees")]
    EmptyAggregation,
    #[error("counter overflow")]
    Overflow,
}

/// Shape and threshold parameters of a DN-tree.
///
/// The index space is padded to the next power of two (at least 2) so every
/// quadrant split halves cleanly. Padded cells are never recorded and never
/// receive reconstructed mass.
#[derive(Debug, Clone, Copy)]
pub struct DnTreeConfig {
    extent_space: u64,
    base_threshold: u64,
    growth_factor: f64,
}

impl DnTreeConfig {
    pub fn new(
        extent_space: u64,
        base_threshold: u64,
        growth_factor: f64,
    ) -> Result<Self, DnTreeError> {
        if extent_space == 0 {
            return Err(DnTreeError::InvalidConfig(
                "extent space must be at least 1".into(),
            ));
        }
        if extent_space > 1 << 31 {
            return Err(DnTreeError::InvalidConfig(format!(
                "extent space {extent_space} exceeds 2^31"
            )));
        }
        if !growth_factor.is_finite() || growth_factor < 1.0 {
            return Err(DnTreeError::InvalidConfig(format!(
                "growth factor must be finite and >= 1, got {growth_factor}"
            )));
        }
        Ok(Self {
            extent_space,
            base_threshold,
            growth_factor,
        })
    }

    pub fn extent_space(&self) -> u64 {
        self.extent_space
    }

    pub fn base_threshold(&self) -> u64 {
        self.base_threshold
    }

    pub fn growth_factor(&self) -> f64 {
        self.growth_factor
    }

    /// Side of the padded matrix.
    pub fn side(&self) -> u64 {
        self.extent_space.next_power_of_two().max(2)
    }

    /// Level of the 1x1 leaves; root children sit at level 1.
    pub fn max_depth(&self) -> u32 {
        self.side().trailing_zeros()
    }

    /// Saturation value `ceil(t * k^level)`, clamped to `u64::MAX`.
    pub fn threshold(&self, level: u32) -> u64 {
        let raw = self.base_threshold as f64 * self.growth_factor.powi(level as i32);
        let ceil = raw.ceil();
        if ceil >= u64::MAX as f64 {
            u64::MAX
        } else {
            ceil as u64
        }
    }

    /// Bitwise equality, including the growth factor's bit pattern.
    pub fn same_as(&self, other: &Self) -> bool {
        self.extent_space == other.extent_space
            && self.base_threshold == other.base_threshold
            && self.growth_factor.to_bits() == other.growth_factor.to_bits()
    }

    fn check(&self, id: ExtentId) -> Result<(), DnTreeError> {
        if id >= self.extent_space {
            Err(DnTreeError::OutOfRange {
                id,
                extent_space: self.extent_space,
            })
        } else {
            Ok(())
        }
    }
}

impl PartialEq for DnTreeConfig {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Number of valid (non-padded) indices in `[start, start + len)`.
fn valid_span(start: u64, len: u64, extent_space: u64) -> u64 {
    extent_space.saturating_sub(start).min(len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padded_side_and_depth() {
        let c = DnTreeConfig::new(4, 4, 1.0).unwrap();
        assert_eq!((c.side(), c.max_depth()), (4, 2));
        let c = DnTreeConfig::new(5, 4, 1.0).unwrap();
        assert_eq!((c.side(), c.max_depth()), (8, 3));
        let c = DnTreeConfig::new(1, 4, 1.0).unwrap();
        assert_eq!((c.side(), c.max_depth()), (2, 1));
    }

    #[test]
    fn thresholds_round_up() {
        let c = DnTreeConfig::new(512, 3, 1.5).unwrap();
        assert_eq!(c.threshold(1), 5); // 4.5
        assert_eq!(c.threshold(2), 7); // 6.75
        let c = DnTreeConfig::new(512, 4, 1.0).unwrap();
        assert_eq!(c.threshold(9), 4);
        let c = DnTreeConfig::new(512, u64::MAX / 2, 8.0).unwrap();
        assert_eq!(c.threshold(30), u64::MAX);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(DnTreeConfig::new(0, 1, 1.0).is_err());
        assert!(DnTreeConfig::new(4, 1, 0.5).is_err());
        assert!(DnTreeConfig::new(4, 1, f64::NAN).is_err());
    }
}
