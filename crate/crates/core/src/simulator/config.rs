//! Experiment description read from a TOML key-value file.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::cluster::ClusterConfig;
use super::compare::{compare_systems, Comparison};
use super::graph::GRAPH_RMAT_P;
use super::{Query, SimError, SyntheticGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    /// One edge type.
    Rmat,
    /// Two edge types over the same vertices.
    Typed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    /// Every query is a BFS from the same seeded root.
    Bfs,
    /// Each query is a two-hop lookup from a seeded user vertex.
    TwoHop,
}

/// Every key is optional; missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphKind,
    /// `2^scale` vertices.
    pub scale: u32,
    pub mean_degree: u32,
    pub rmat_p: [f64; 4],
    pub extent_size: usize,
    pub query: QueryKind,
    pub queries: usize,
    pub max_phases: usize,
    pub nodes: u32,
    pub t: u64,
    pub k_growth: f64,
    pub repartition_interval: usize,
    pub freeze_after: Option<u64>,
    pub reset_after_repartition: bool,
    pub tolerance: f64,
    pub cache_factor: f64,
    pub seed: u64,
    pub restarts: usize,
    pub max_passes: usize,
    pub volume_constraint: bool,
    pub volume_tolerance: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let c = ClusterConfig::default();
        Self {
            graph: GraphKind::Rmat,
            scale: 16,
            mean_degree: 16,
            rmat_p: GRAPH_RMAT_P,
            extent_size: 256,
            query: QueryKind::Bfs,
            queries: 4,
            max_phases: 10,
            nodes: c.num_nodes,
            t: c.base_threshold,
            k_growth: c.growth_factor,
            repartition_interval: c.repartition_interval,
            freeze_after: c.freeze_after,
            reset_after_repartition: c.reset_after_repartition,
            tolerance: c.tolerance,
            cache_factor: c.cache_factor,
            seed: 42,
            restarts: c.restarts,
            max_passes: c.max_passes,
            volume_constraint: c.volume_constraint,
            volume_tolerance: c.volume_tolerance,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, SimError> {
        toml::from_str(s).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn cluster_config(&self) -> ClusterConfig {
        ClusterConfig {
            num_nodes: self.nodes,
            base_threshold: self.t,
            growth_factor: self.k_growth,
            repartition_interval: self.repartition_interval,
            freeze_after: self.freeze_after,
            reset_after_repartition: self.reset_after_repartition,
            tolerance: self.tolerance,
            cache_factor: self.cache_factor,
            seed: self.seed,
            restarts: self.restarts,
            max_passes: self.max_passes,
            volume_constraint: self.volume_constraint,
            volume_tolerance: self.volume_tolerance,
        }
    }

    pub fn build_graph(&self) -> Result<SyntheticGraph, SimError> {
        match self.graph {
            GraphKind::Rmat => SyntheticGraph::rmat(
                self.scale,
                self.mean_degree,
                self.rmat_p,
                self.extent_size,
                self.seed,
            ),
            GraphKind::Typed => SyntheticGraph::typed(
                self.scale,
                self.mean_degree,
                self.rmat_p,
                self.extent_size,
                self.seed,
            ),
        }
    }

    /// Seeded query list. Start vertices are drawn among vertices with at
    /// least one layer-0 edge.
    pub fn build_workload(&self, g: &SyntheticGraph) -> Result<Vec<Query>, SimError> {
        if self.queries == 0 {
            return Err(SimError::Config("queries must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x0051_EED5);
        let mut draw = || -> Result<u32, SimError> {
            let n = g.num_vertices() as u32;
            for _ in 0..64 * n.max(1) {
                let v = rng.random_range(0..n);
                if g.layer(0).degree(v) > 0 {
                    return Ok(v);
                }
            }
            Err(SimError::Config(
                "graph has no edges to start queries from".into(),
            ))
        };
        match self.query {
            QueryKind::Bfs => {
                let root = draw()?;
                Ok(vec![
                    Query::Bfs {
                        root,
                        max_phases: self.max_phases,
                    };
                    self.queries
                ])
            }
            QueryKind::TwoHop => (0..self.queries)
                .map(|_| draw().map(|user| Query::TwoHop { user }))
                .collect(),
        }
    }

    /// Builds the graph and workload and runs the comparison.
    pub fn run(&self) -> Result<Comparison, SimError> {
        let g = self.build_graph()?;
        let workload = self.build_workload(&g)?;
        compare_systems(&g, &workload, &self.cluster_config())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_files() {
        let c = ExperimentConfig::from_toml_str("nodes = 2\nk_growth = 1.5\nquery = \"two_hop\"\n")
            .unwrap();
        assert_eq!(c.nodes, 2);
        assert_eq!(c.k_growth, 1.5);
        assert_eq!(c.query, QueryKind::TwoHop);
        assert_eq!(c.extent_size, 256);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentConfig::from_toml_str("nodez = 2").is_err());
        assert!(ExperimentConfig::from_toml_str("graph = \"grid\"").is_err());
    }

    #[test]
    fn workload_is_seeded() {
        let c = ExperimentConfig {
            scale: 8,
            extent_size: 16,
            graph: GraphKind::Typed,
            query: QueryKind::TwoHop,
            ..ExperimentConfig::default()
        };
        let g = c.build_graph().unwrap();
        let a = c.build_workload(&g).unwrap();
        assert_eq!(a, c.build_workload(&g).unwrap());
        assert_eq!(a.len(), 4);
    }
}
