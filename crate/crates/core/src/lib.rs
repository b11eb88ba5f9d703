//! Workload-adaptive extent placement: DN-tree summaries of extent
//! transitions, multi-constraint partitioning of the reconstructed access
//! graph, and a BSP cluster simulator comparing adaptive and hash placement.

pub mod analysis;
pub mod distribution;
pub mod dntree;
pub mod golden;
pub mod partitioner;
pub mod simulator;
pub mod workload;

pub use distribution::{derive_distribution, hash_distribution, DistributionFunction};
pub use dntree::{DnTree, DnTreeConfig, DnTreeError, SerializedDnTree, TransitionMatrix};
pub use partitioner::{
    AccessGraph, ConstraintMatrix, PartitionError, PartitionMetrics, PartitionSpec, Partitioning,
};
