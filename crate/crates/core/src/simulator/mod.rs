//! Deterministic BSP cluster simulator.
//!
//! A query is first traced into per-phase extent accesses and inter-phase
//! handoffs ([`ExtentTrace`]), independent of placement. Executing a trace
//! under a [`DistributionFunction`] yields per-node loads and network units
//! ([`BspTrace`]) and, for adaptive clusters, feeds each node's DN-tree.

mod bsp;
mod cluster;
mod compare;
mod config;
mod graph;
mod trace;

use thiserror::Error;

use crate::dntree::DnTreeError;
use crate::partitioner::PartitionError;
use crate::workload::WorkloadError;

pub use crate::distribution::{hash_distribution, DistributionFunction};
pub use bsp::{execute, metrics, population_stddev, BspTrace, CacheModel, CacheState, RunMetrics};
pub use cluster::{Cluster, ClusterConfig, CycleOutcome};
pub use compare::{compare_systems, Comparison, System, SystemRun};
pub use config::{ExperimentConfig, GraphKind, QueryKind};
pub use graph::{Layer, SyntheticGraph, GRAPH_RMAT_P};
pub use trace::{trace_query, ExtentTrace, Handoff, Query};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(u32),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Tree(#[from] DnTreeError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
