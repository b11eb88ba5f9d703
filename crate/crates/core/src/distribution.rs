//! Placement of extents on cluster nodes.

use std::io::{BufRead, Write};

use crate::partitioner::{PartitionError, Partitioning};

/// Total map from extent id to node id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DistributionFunction {
    nodes: Vec<u32>,
    num_nodes: u32,
}

impl DistributionFunction {
    pub fn new(nodes: Vec<u32>, num_nodes: u32) -> Result<Self, PartitionError> {
        if num_nodes == 0 {
            return Err(PartitionError::InvalidSpec("num_nodes must be >= 1".into()));
        }
        if let Some(&n) = nodes.iter().find(|&&n| n >= num_nodes) {
            return Err(PartitionError::InvalidSpec(format!(
                "node {n} out of range for {num_nodes} nodes"
            )));
        }
        Ok(Self { nodes, num_nodes })
    }

    pub fn node_of(&self, extent: usize) -> u32 {
        self.nodes[extent]
    }

    pub fn num_extents(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_nodes(&self) -> u32 {
        self.num_nodes
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.nodes
    }

    /// Extents whose node differs in `other`.
    pub fn remapped(&self, other: &Self) -> usize {
        self.nodes
            .iter()
            .zip(&other.nodes)
            .filter(|(a, b)| a != b)
            .count()
            + self.nodes.len().abs_diff(other.nodes.len())
    }

    /// Same assignment viewed as a partitioning with one part per node.
    pub fn to_partitioning(&self) -> Partitioning {
        Partitioning::new(
            self.nodes.iter().map(|&n| n as usize).collect(),
            self.num_nodes as usize,
        )
        .expect("node ids are in range")
    }

    pub fn write_csv(&self, w: impl Write) -> std::io::Result<()> {
        self.to_partitioning().write_csv(w)
    }

    pub fn read_csv(r: impl BufRead, num_nodes: u32) -> Result<Self, PartitionError> {
        derive_distribution(&Partitioning::read_csv(r, num_nodes as usize)?)
    }
}

/// Extent `e` on node `e mod n`.
pub fn hash_distribution(num_extents: usize, num_nodes: u32) -> DistributionFunction {
    assert!(num_nodes >= 1, "num_nodes must be >= 1");
    DistributionFunction {
        nodes: (0..num_extents)
            .map(|e| (e % num_nodes as usize) as u32)
            .collect(),
        num_nodes,
    }
}

/// Part `j` becomes node `j`.
pub fn derive_distribution(p: &Partitioning) -> Result<DistributionFunction, PartitionError> {
    let num_nodes = u32::try_from(p.num_parts())
        .map_err(|_| PartitionError::InvalidSpec("too many parts".into()))?;
    DistributionFunction::new(p.parts().iter().map(|&x| x as u32).collect(), num_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_placement() {
        assert_eq!(hash_distribution(4, 2).as_slice(), &[0, 1, 0, 1]);
        assert!(hash_distribution(5, 1).as_slice().iter().all(|&n| n == 0));
    }

    #[test]
    fn derive_is_identity_relabeling() {
        let p = Partitioning::new(vec![0, 1, 0, 1], 2).unwrap();
        let df = derive_distribution(&p).unwrap();
        assert_eq!(df.as_slice(), &[0, 1, 0, 1]);
        assert_eq!(df.to_partitioning(), p);
    }

    #[test]
    fn remapped_counts_moves() {
        let a = hash_distribution(6, 2);
        let b = DistributionFunction::new(vec![0, 1, 1, 1, 0, 0], 2).unwrap();
        assert_eq!(a.remapped(&b), 2);
        assert_eq!(a.remapped(&a), 0);
    }

    #[test]
    fn csv_round_trip() {
        let df = hash_distribution(5, 3);
        let mut buf = Vec::new();
        df.write_csv(&mut buf).unwrap();
        assert_eq!(DistributionFunction::read_csv(&buf[..], 3).unwrap(), df);
    }
}
