//! Preorder encoding, binary wire format and merging of DN-trees.
//!
//! Wire layout (little-endian):
//!
//! ```text
//! "DNT1" | extent_space u64 | base_threshold u64 | growth_factor f64
//!        | entry_count u64 | entry_count x { count u64, marker u8 }
//! ```

use super::tree::Node;
use super::{valid_span, DnTree, DnTreeConfig, DnTreeError};

pub const WIRE_MAGIC: &[u8; 4] = b"DNT1";

/// One preorder record: the node's counter and whether four subtrees follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub count: u64,
    pub marker: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerializedDnTree {
    config: DnTreeConfig,
    entries: Vec<Entry>,
}

impl SerializedDnTree {
    /// Wraps raw entries after checking they form a well-formed encoding.
    pub fn new(config: DnTreeConfig, entries: Vec<Entry>) -> Result<Self, DnTreeError> {
        let out = Self { config, entries };
        out.to_tree()?;
        Ok(out)
    }

    pub fn config(&self) -> &DnTreeConfig {
        &self.config
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Sum of all counters.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn empty(config: DnTreeConfig) -> Self {
        DnTree::new(config).serialize()
    }

    /// Rebuilds the tree. Fails on truncated input, trailing entries,
    /// subtrees below the leaf level, or counts in padded regions.
    pub fn to_tree(&self) -> Result<DnTree, DnTreeError> {
        let mut nodes = vec![
            Node {
                count: 0,
                first_child: 0
            };
            4
        ];
        let mut pos = 0;
        let half = self.config.side() / 2;
        for q in 0..4u64 {
            let (r, c) = ((q >> 1) * half, (q & 1) * half);
            decode(
                &self.config,
                &self.entries,
                &mut pos,
                &mut nodes,
                q as usize,
                1,
                r,
                c,
            )?;
        }
        if pos != self.entries.len() {
            return Err(DnTreeError::Malformed(format!(
                "{} trailing entries",
                self.entries.len() - pos
            )));
        }
        DnTree::from_nodes(self.config, nodes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(36 + self.entries.len() * 9);
        out.extend_from_slice(WIRE_MAGIC);
        out.extend_from_slice(&self.config.extent_space().to_le_bytes());
        out.extend_from_slice(&self.config.base_threshold().to_le_bytes());
        out.extend_from_slice(&self.config.growth_factor().to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&e.count.to_le_bytes());
            out.push(e.marker as u8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DnTreeError> {
        let mut rd = Reader { bytes, pos: 0 };
        if rd.take(4)? != WIRE_MAGIC {
            return Err(DnTreeError::Malformed("bad magic".into()));
        }
        let extent_space = rd.u64()?;
        let base_threshold = rd.u64()?;
        let growth_factor = f64::from_le_bytes(rd.take(8)?.try_into().unwrap());
        let config = DnTreeConfig::new(extent_space, base_threshold, growth_factor)?;
        let count = rd.u64()?;
        let remaining = (bytes.len() - rd.pos) as u64;
        if count.checked_mul(9) != Some(remaining) {
            return Err(DnTreeError::Malformed(format!(
                "header announces {count} entries, payload holds {remaining} bytes"
            )));
        }
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let c = rd.u64()?;
            let marker = match rd.take(1)?[0] {
                0 => false,
                1 => true,
                b => return Err(DnTreeError::Malformed(format!("marker byte {b}"))),
            };
            entries.push(Entry { count: c, marker });
        }
        Self::new(config, entries)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DnTreeError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(DnTreeError::Malformed("truncated input".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, DnTreeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[allow(clippy::too_many_arguments)]
fn decode(
    config: &DnTreeConfig,
    entries: &[Entry],
    pos: &mut usize,
    nodes: &mut Vec<Node>,
    idx: usize,
    level: u32,
    row0: u64,
    col0: u64,
) -> Result<(), DnTreeError> {
    let entry = *entries
        .get(*pos)
        .ok_or_else(|| DnTreeError::Malformed("truncated preorder list".into()))?;
    *pos += 1;
    let size = 1u64 << (config.max_depth() - level);
    let m = config.extent_space();
    if entry.count > 0 && (valid_span(row0, size, m) == 0 || valid_span(col0, size, m) == 0) {
        return Err(DnTreeError::Malformed(format!(
            "nonzero count in padded region ({row0}, {col0})"
        )));
    }
    nodes[idx].count = entry.count;
    if !entry.marker {
        return Ok(());
    }
    if level == config.max_depth() {
        return Err(DnTreeError::Malformed(
            "marker set on a single-cell node".into(),
        ));
    }
    let first = u32::try_from(nodes.len()).map_err(|_| DnTreeError::Overflow)?;
    nodes.extend(std::iter::repeat_n(
        Node {
            count: 0,
            first_child: 0,
        },
        4,
    ));
    nodes[idx].first_child = first;
    let half = size / 2;
    for q in 0..4u64 {
        let (r, c) = (row0 + (q >> 1) * half, col0 + (q & 1) * half);
        decode(
            config,
            entries,
            pos,
            nodes,
            first as usize + q as usize,
            level + 1,
            r,
            c,
        )?;
    }
    Ok(())
}

impl DnTree {
    /// Preorder `(count, marker)` list of the root's children, quadrants in
    /// the order row-low/col-low, row-low/col-high, row-high/col-low,
    /// row-high/col-high.
    pub fn serialize(&self) -> SerializedDnTree {
        let mut entries = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<usize> = vec![3, 2, 1, 0];
        while let Some(idx) = stack.pop() {
            let node = self.nodes[idx];
            entries.push(Entry {
                count: node.count,
                marker: node.first_child != 0,
            });
            if node.first_child != 0 {
                let f = node.first_child as usize;
                stack.extend([f + 3, f + 2, f + 1, f]);
            }
        }
        SerializedDnTree {
            config: *self.config(),
            entries,
        }
    }

    pub fn deserialize(s: &SerializedDnTree) -> Result<Self, DnTreeError> {
        s.to_tree()
    }
}

struct Cursor<'a> {
    entries: &'a [Entry],
    pos: usize,
}

impl Cursor<'_> {
    fn next(&mut self) -> Result<Entry, DnTreeError> {
        let e = self
            .entries
            .get(self.pos)
            .copied()
            .ok_or_else(|| DnTreeError::Malformed("truncated preorder list".into()))?;
        self.pos += 1;
        Ok(e)
    }
}

/// Merges two serialized trees into a tree representing the sum of their
/// matrices. The structure is the union of both inputs and overlapping
/// counters are added, so counters may exceed their thresholds; the result
/// is meant to be read, not updated. Both inputs are read sequentially once.
pub fn join(a: &SerializedDnTree, b: &SerializedDnTree) -> Result<SerializedDnTree, DnTreeError> {
    if !a.config.same_as(&b.config) {
        return Err(DnTreeError::ConfigMismatch);
    }
    let mut ca = Cursor {
        entries: &a.entries,
        pos: 0,
    };
    let mut cb = Cursor {
        entries: &b.entries,
        pos: 0,
    };
    let mut out = Vec::with_capacity(a.entries.len().max(b.entries.len()));
    let max_depth = a.config.max_depth();
    join_siblings(Some(&mut ca), Some(&mut cb), &mut out, 1, max_depth)?;
    if ca.pos != a.entries.len() || cb.pos != b.entries.len() {
        return Err(DnTreeError::Malformed("trailing entries".into()));
    }
    Ok(SerializedDnTree {
        config: a.config,
        entries: out,
    })
}

/// Walks one group of four siblings. A `None` side has no vertex in this
/// branch; the other side's entries are then copied through unchanged.
fn join_siblings(
    mut a: Option<&mut Cursor<'_>>,
    mut b: Option<&mut Cursor<'_>>,
    out: &mut Vec<Entry>,
    level: u32,
    max_depth: u32,
) -> Result<(), DnTreeError> {
    for _ in 0..4 {
        let (ea, eb) = match (a.as_deref_mut(), b.as_deref_mut()) {
            (Some(ca), Some(cb)) => (Some(ca.next()?), Some(cb.next()?)),
            (Some(ca), None) => (Some(ca.next()?), None),
            (None, Some(cb)) => (None, Some(cb.next()?)),
            (None, None) => unreachable!("join needs at least one side"),
        };
        let count = match (ea, eb) {
            (Some(x), Some(y)) => x.count.checked_add(y.count).ok_or(DnTreeError::Overflow)?,
            (Some(x), None) | (None, Some(x)) => x.count,
            (None, None) => unreachable!(),
        };
        let mark_a = ea.is_some_and(|e| e.marker);
        let mark_b = eb.is_some_and(|e| e.marker);
        out.push(Entry {
            count,
            marker: mark_a || mark_b,
        });
        if (mark_a || mark_b) && level == max_depth {
            return Err(DnTreeError::Malformed(
                "marker set on a single-cell node".into(),
            ));
        }
        match (mark_a, mark_b) {
            (true, true) => join_siblings(
                a.as_deref_mut(),
                b.as_deref_mut(),
                out,
                level + 1,
                max_depth,
            )?,
            (true, false) => join_siblings(a.as_deref_mut(), None, out, level + 1, max_depth)?,
            (false, true) => join_siblings(None, b.as_deref_mut(), out, level + 1, max_depth)?,
            (false, false) => {}
        }
    }
    Ok(())
}

/// Result of a tree-shaped reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub tree: SerializedDnTree,
    /// Number of pairwise joins (data exchanges) performed.
    pub joins: usize,
}

/// Folds the trees pairwise, level by level, like a binary reduction tree
/// over the cluster: `n` trees take exactly `n - 1` joins.
pub fn aggregate(trees: &[SerializedDnTree]) -> Result<Aggregation, DnTreeError> {
    let first = trees.first().ok_or(DnTreeError::EmptyAggregation)?;
    if trees.iter().any(|t| !t.config.same_as(&first.config)) {
        return Err(DnTreeError::ConfigMismatch);
    }
    let mut joins = 0;
    let mut level: Vec<SerializedDnTree> = trees.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(left) = it.next() {
            match it.next() {
                Some(right) => {
                    next.push(join(&left, &right)?);
                    joins += 1;
                }
                None => next.push(left),
            }
        }
        level = next;
    }
    Ok(Aggregation {
        tree: level.pop().unwrap(),
        joins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> DnTreeConfig {
        DnTreeConfig::new(8, 2, 1.5).unwrap()
    }

    fn sample(pairs: &[(u64, u64)]) -> DnTree {
        let mut t = DnTree::new(cfg());
        for &(a, b) in pairs {
            t.record(a, b).unwrap();
        }
        t
    }

    #[test]
    fn empty_tree_encoding() {
        let s = DnTree::new(cfg()).serialize();
        assert_eq!(
            s.entries(),
            &[Entry {
                count: 0,
                marker: false
            }; 4]
        );
    }

    #[test]
    fn wire_round_trip() {
        let t = sample(&[(1, 2), (1, 2), (1, 2), (1, 3), (7, 7), (0, 6)]);
        let bytes = t.serialize().to_bytes();
        assert_eq!(&bytes[..4], b"DNT1");
        let back = SerializedDnTree::from_bytes(&bytes).unwrap();
        assert_eq!(DnTree::deserialize(&back).unwrap(), t);
    }

    #[test]
    fn rejects_malformed_input() {
        let c = cfg();
        let e = |count, marker| Entry { count, marker };
        // truncated: only three root children
        assert!(SerializedDnTree::new(c, vec![e(0, false); 3]).is_err());
        // marker with fewer than four subtrees
        let mut v = vec![e(2, true), e(0, false), e(0, false)];
        v.extend([e(0, false); 3]);
        assert!(SerializedDnTree::new(c, v).is_err());
        // trailing entry
        assert!(SerializedDnTree::new(c, vec![e(0, false); 5]).is_err());

        let good = sample(&[(0, 0)]).serialize().to_bytes();
        assert!(SerializedDnTree::from_bytes(&good[..good.len() - 1]).is_err());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(SerializedDnTree::from_bytes(&bad_magic).is_err());
        let mut bad_marker = good.clone();
        let last = bad_marker.len() - 1;
        bad_marker[last] = 7;
        assert!(SerializedDnTree::from_bytes(&bad_marker).is_err());
    }

    #[test]
    fn rejects_mass_in_padding() {
        let c = DnTreeConfig::new(3, 2, 1.0).unwrap();
        let e = |count| Entry {
            count,
            marker: false,
        };
        // q3 covers rows/cols 2..4 and is valid (cell (2,2)); make the tree
        // deeper and put mass in the padded cell (3,3).
        let mut v = vec![
            e(0),
            e(0),
            e(0),
            Entry {
                count: 2,
                marker: true,
            },
        ];
        v.extend([e(0), e(0), e(0), e(1)]);
        assert!(SerializedDnTree::new(c, v).is_err());
    }

    #[test]
    fn join_config_mismatch() {
        let a = DnTree::new(cfg()).serialize();
        let b = DnTree::new(DnTreeConfig::new(8, 2, 2.0).unwrap()).serialize();
        assert_eq!(join(&a, &b), Err(DnTreeError::ConfigMismatch));
    }

    #[test]
    fn join_adds_and_unions() {
        let a = sample(&[(0, 0), (0, 0), (0, 0), (0, 1)]);
        let b = sample(&[(6, 6)]);
        let j = join(&a.serialize(), &b.serialize()).unwrap();
        assert_eq!(j.total(), 5);
        let tree = j.to_tree().unwrap();
        assert_eq!(tree.root_counters(), [a.root_counters()[0], 0, 0, 1]);
        assert_eq!(tree.stats().node_count, a.stats().node_count);
    }

    #[test]
    fn aggregate_counts_joins() {
        let trees: Vec<_> = (0..5).map(|i| sample(&[(i, i)]).serialize()).collect();
        let agg = aggregate(&trees).unwrap();
        assert_eq!(agg.joins, 4);
        assert_eq!(agg.tree.total(), 5);
        let single = aggregate(&trees[..1]).unwrap();
        assert_eq!(single.joins, 0);
        assert_eq!(single.tree, trees[0]);
        assert_eq!(aggregate(&[]), Err(DnTreeError::EmptyAggregation));
    }
}
