use crate::distribution::{derive_distribution, hash_distribution, DistributionFunction};
use crate::dntree::{aggregate, DnTree, DnTreeConfig, TransitionMatrix};
use crate::partitioner::{
    evaluate, AccessGraph, ConstraintMatrix, HeuristicPartitioner, PartitionEngine, PartitionError,
    PartitionSpec, DEFAULT_TOLERANCE,
};

use super::bsp::{execute, BspTrace, CacheModel, CacheState};
use super::{ExtentTrace, SimError};

const VOLUME_RETRIES: usize = 6;
const MIN_VOLUME_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub num_nodes: u32,
    /// DN-tree base threshold `t`.
    pub base_threshold: u64,
    /// DN-tree growth factor `k`.
    pub growth_factor: f64,
    /// Queries between repartition cycles.
    pub repartition_interval: usize,
    /// Stop recording into a node's tree once it holds this many
    /// transitions.
    pub freeze_after: Option<u64>,
    /// Clear every tree after a repartition instead of accumulating.
    pub reset_after_repartition: bool,
    /// Imbalance tolerance applied to every constraint.
    pub tolerance: f64,
    /// Cost multiplier for extents already resident on their node.
    pub cache_factor: f64,
    pub seed: u64,
    pub restarts: usize,
    pub max_passes: usize,
    /// Also balance reconstructed access volume per node.
    pub volume_constraint: bool,
    /// Tolerance of the volume constraint; `tolerance` when unset.
    pub volume_tolerance: Option<f64>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            num_nodes: 4,
            base_threshold: 16,
            growth_factor: 2.0,
            repartition_interval: 1,
            freeze_after: None,
            reset_after_repartition: false,
            tolerance: DEFAULT_TOLERANCE,
            cache_factor: 0.5,
            seed: 1,
            restarts: 8,
            max_passes: 32,
            volume_constraint: true,
            volume_tolerance: None,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_nodes == 0 {
            return Err(SimError::Config("nodes must be >= 1".into()));
        }
        if self.repartition_interval == 0 {
            return Err(SimError::Config("repartition_interval must be >= 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 1.0 {
            return Err(SimError::Config(format!(
                "tolerance {} below 1",
                self.tolerance
            )));
        }
        if !(0.0..=1.0).contains(&self.cache_factor) {
            return Err(SimError::Config(format!(
                "cache_factor {} outside [0, 1]",
                self.cache_factor
            )));
        }
        Ok(())
    }
}

/// What a repartition cycle did.
#[derive(Debug, Clone, PartialEq)]
pub enum CycleOutcome {
    /// Nothing recorded yet; the distribution function is unchanged.
    NoOp,
    Repartitioned {
        /// Extents now on a different node. Moving them is not charged.
        remapped: usize,
        /// Joins spent aggregating the node trees.
        joins: usize,
        /// Edge cut of the new distribution on the reconstructed graph.
        cut: f64,
        /// Edge cut of the hash distribution on the same graph, when the
        /// hash distribution meets the tolerances.
        hash_cut: Option<f64>,
    },
}

/// Simulated cluster: current distribution function plus one DN-tree per
/// node.
#[derive(Debug, Clone)]
pub struct Cluster {
    config: ClusterConfig,
    tree_config: DnTreeConfig,
    tags: Vec<usize>,
    num_structures: usize,
    df: DistributionFunction,
    trees: Vec<DnTree>,
    queries_since_cycle: usize,
}

impl Cluster {
    /// Starts from the hash distribution. `tags[e]` is the data structure of
    /// extent `e`.
    pub fn new(config: ClusterConfig, tags: Vec<usize>) -> Result<Self, SimError> {
        config.validate()?;
        let m = tags.len();
        if m == 0 {
            return Err(SimError::Config("no extents".into()));
        }
        let num_structures = tags.iter().max().map_or(0, |&t| t + 1);
        let tree_config = DnTreeConfig::new(m as u64, config.base_threshold, config.growth_factor)?;
        let df = hash_distribution(m, config.num_nodes);
        let trees = vec![DnTree::new(tree_config); config.num_nodes as usize];
        Ok(Self {
            config,
            tree_config,
            tags,
            num_structures,
            df,
            trees,
            queries_since_cycle: 0,
        })
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn distribution(&self) -> &DistributionFunction {
        &self.df
    }

    pub fn set_distribution(&mut self, df: DistributionFunction) -> Result<(), SimError> {
        if df.num_extents() != self.tags.len() || df.num_nodes() != self.config.num_nodes {
            return Err(SimError::Config(
                "distribution does not fit the cluster".into(),
            ));
        }
        self.df = df;
        Ok(())
    }

    pub fn trees(&self) -> &[DnTree] {
        &self.trees
    }

    pub fn tags(&self) -> &[usize] {
        &self.tags
    }

    /// Executes one query under the current distribution function, records
    /// it, and repartitions when the interval is reached.
    pub fn run_query(
        &mut self,
        trace: &ExtentTrace,
        cache: Option<CacheModel<'_>>,
        adaptive: bool,
    ) -> Result<(BspTrace, Option<CycleOutcome>), SimError> {
        let frozen: Vec<bool> = self
            .trees
            .iter()
            .map(|t| {
                self.config
                    .freeze_after
                    .is_some_and(|f| t.total_recorded() >= f)
            })
            .collect();
        let bsp = if adaptive {
            execute(trace, &self.df, cache, Some((&mut self.trees, &frozen)))?
        } else {
            execute(trace, &self.df, cache, None)?
        };
        let mut outcome = None;
        if adaptive {
            self.queries_since_cycle += 1;
            if self.queries_since_cycle >= self.config.repartition_interval {
                outcome = Some(self.repartition_cycle()?);
            }
        }
        Ok((bsp, outcome))
    }

    /// Aggregated reconstruction of everything recorded so far.
    pub fn reconstructed_matrix(&self) -> Result<(TransitionMatrix, usize), SimError> {
        let serialized: Vec<_> = self.trees.iter().map(DnTree::serialize).collect();
        let agg = aggregate(&serialized)?;
        Ok((agg.tree.to_tree()?.reconstruct_matrix(), agg.joins))
    }

    /// Uniform and per-structure constraints, plus the access-volume
    /// constraint at `volume_slack` above the unavoidable imbalance.
    fn constraints(
        &self,
        m_hat: &TransitionMatrix,
        volume_slack: Option<f64>,
    ) -> Result<(ConstraintMatrix, PartitionSpec), SimError> {
        let m = self.tags.len();
        let k = self.config.num_nodes as usize;
        let tol = self.config.tolerance;
        let mut columns = vec![vec![1.0; m]];
        for d in 0..self.num_structures {
            columns.push(
                self.tags
                    .iter()
                    .map(|&t| f64::from(u8::from(t == d)))
                    .collect(),
            );
        }
        let mut tolerance = vec![tol; columns.len()];
        if let Some(slack) = volume_slack {
            let volume: Vec<f64> = (0..m)
                .map(|e| {
                    m_hat.row(e).iter().sum::<f64>() + (0..m).map(|r| m_hat.get(r, e)).sum::<f64>()
                })
                .collect();
            let total: f64 = volume.iter().sum();
            if total > 0.0 {
                let heaviest = volume.iter().copied().fold(0.0, f64::max) / total;
                tolerance.push((1.0 + slack).max(k as f64 * heaviest + slack));
                columns.push(volume);
            }
        }
        Ok((
            ConstraintMatrix::from_columns(&columns)?,
            PartitionSpec::new(k, tolerance)?,
        ))
    }

    /// Aggregates the node trees, partitions the reconstructed access graph
    /// and installs the resulting distribution function.
    pub fn repartition_cycle(&mut self) -> Result<CycleOutcome, SimError> {
        self.queries_since_cycle = 0;
        if self.trees.iter().all(DnTree::is_empty) {
            return Ok(CycleOutcome::NoOp);
        }
        let (m_hat, joins) = self.reconstructed_matrix()?;
        let graph = AccessGraph::from_matrix(&m_hat);
        let hash = hash_distribution(self.tags.len(), self.config.num_nodes);
        let engine = HeuristicPartitioner {
            seed: self.config.seed,
            max_passes: self.config.max_passes,
            restarts: self.config.restarts,
            warm_starts: vec![
                self.df.as_slice().iter().map(|&n| n as usize).collect(),
                hash.as_slice().iter().map(|&n| n as usize).collect(),
            ],
        };
        // The volume constraint is relaxed when it cannot be met: its slack
        // doubles up to VOLUME_RETRIES times, then it is dropped.
        let mut slacks: Vec<Option<f64>> = Vec::new();
        if self.config.volume_constraint {
            let base = self
                .config
                .volume_tolerance
                .unwrap_or(self.config.tolerance)
                - 1.0;
            slacks.push(Some(base));
            let mut s = base.max(MIN_VOLUME_SLACK);
            for _ in 0..VOLUME_RETRIES {
                s *= 2.0;
                slacks.push(Some(s));
            }
        }
        slacks.push(None);
        let mut attempt = 0;
        let (constraints, spec, parts) = loop {
            let (constraints, spec) = self.constraints(&m_hat, slacks[attempt])?;
            match engine.partition(&graph, &constraints, &spec) {
                Ok(parts) => break (constraints, spec, parts),
                Err(PartitionError::Infeasible(why)) if attempt + 1 < slacks.len() => {
                    log::info!(
                        "volume slack {:?} infeasible ({why}), relaxing",
                        slacks[attempt]
                    );
                    attempt += 1;
                }
                Err(e) => return Err(e.into()),
            }
        };
        let hash_metrics = evaluate(&graph, &constraints, &hash.to_partitioning())?;
        let cut = evaluate(&graph, &constraints, &parts)?.edge_cut;
        let df = derive_distribution(&parts)?;
        let remapped = self.df.remapped(&df);
        log::debug!("repartition: cut {cut}, {remapped} extents remapped, {joins} joins");
        self.df = df;
        if self.config.reset_after_repartition {
            self.trees = vec![DnTree::new(self.tree_config); self.config.num_nodes as usize];
        }
        Ok(CycleOutcome::Repartitioned {
            remapped,
            joins,
            cut,
            hash_cut: hash_metrics
                .satisfies(&spec)
                .then_some(hash_metrics.edge_cut),
        })
    }
}

/// Runs a batch of traces as one execution, optionally warming a cache.
pub(crate) fn run_execution(
    cluster: &mut Cluster,
    traces: &[ExtentTrace],
    warm: Option<&CacheState>,
    adaptive: bool,
    cycles: &mut Vec<CycleOutcome>,
) -> Result<(BspTrace, CacheState), SimError> {
    let mut total = BspTrace::default();
    let mut fill = CacheState::default();
    let factor = cluster.config.cache_factor;
    for t in traces {
        let cache = CacheModel {
            warm,
            factor,
            fill: Some(&mut fill),
        };
        let (bsp, outcome) = cluster.run_query(t, Some(cache), adaptive)?;
        total.absorb(&bsp);
        cycles.extend(outcome);
    }
    Ok((total, fill))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Handoff;

    fn chain_trace(seq: &[u32]) -> ExtentTrace {
        // one extent per phase, one message between consecutive phases
        ExtentTrace {
            phases: seq.iter().map(|&e| vec![(e, 1)]).collect(),
            boundaries: seq
                .windows(2)
                .map(|w| {
                    vec![Handoff {
                        src: w[0],
                        dst: w[1],
                        messages: 1,
                    }]
                })
                .collect(),
            edges_traversed: seq.len() as u64,
        }
    }

    #[test]
    fn empty_trees_are_a_no_op() {
        let mut c = Cluster::new(ClusterConfig::default(), vec![0; 8]).unwrap();
        let before = c.distribution().clone();
        assert_eq!(c.repartition_cycle().unwrap(), CycleOutcome::NoOp);
        assert_eq!(c.distribution(), &before);
    }

    #[test]
    fn learns_pairs_that_talk() {
        let cfg = ClusterConfig {
            num_nodes: 2,
            base_threshold: 0,
            growth_factor: 1.0,
            tolerance: 1.0,
            ..ClusterConfig::default()
        };
        let mut c = Cluster::new(cfg, vec![0; 4]).unwrap();
        assert_eq!(c.distribution().as_slice(), &[0, 1, 0, 1]);
        let t = chain_trace(&[0, 1, 0, 1, 2, 3, 2, 3]);
        let (_, outcome) = c.run_query(&t, None, true).unwrap();
        let Some(CycleOutcome::Repartitioned { cut, hash_cut, .. }) = outcome else {
            panic!("expected a repartition");
        };
        let df = c.distribution().as_slice();
        assert_eq!(df[0], df[1]);
        assert_eq!(df[2], df[3]);
        assert_ne!(df[0], df[2]);
        assert!(cut <= hash_cut.unwrap());
    }

    #[test]
    fn frozen_trees_stop_recording() {
        let cfg = ClusterConfig {
            num_nodes: 1,
            freeze_after: Some(2),
            repartition_interval: 100,
            ..ClusterConfig::default()
        };
        let mut c = Cluster::new(cfg, vec![0; 4]).unwrap();
        let t = chain_trace(&[0, 1, 2, 3]);
        c.run_query(&t, None, true).unwrap();
        assert_eq!(c.trees()[0].total_recorded(), 3);
        c.run_query(&t, None, true).unwrap();
        assert_eq!(c.trees()[0].total_recorded(), 3);
    }

    #[test]
    fn reset_clears_trees() {
        let cfg = ClusterConfig {
            num_nodes: 2,
            reset_after_repartition: true,
            ..ClusterConfig::default()
        };
        let mut c = Cluster::new(cfg, vec![0; 4]).unwrap();
        c.run_query(&chain_trace(&[0, 1, 2, 3]), None, true)
            .unwrap();
        assert!(c.trees().iter().all(DnTree::is_empty));
    }
}
