//! Cost model: a phase lasts as long as its busiest node, and every
//! (source extent, remote destination node) pair at a phase boundary costs
//! one network unit.

use std::collections::HashSet;

use crate::distribution::DistributionFunction;
use crate::dntree::DnTree;

use super::{ExtentTrace, SimError};

/// Per-node load and network traffic of one or more query executions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BspTrace {
    /// `loads[phase][node]`, in access-cost units.
    pub loads: Vec<Vec<f64>>,
    /// `net_in[boundary][node]`: network units received after `boundary`.
    pub net_in: Vec<Vec<u64>>,
    pub accesses: u64,
    pub edges_traversed: u64,
    /// Vertex messages whose endpoints sit on different nodes.
    pub edge_cut_messages: u64,
    /// Sum over phases, and over executions, of the slowest node's load.
    pub compute_time: f64,
}

impl BspTrace {
    pub fn num_nodes(&self) -> usize {
        self.loads.first().map_or(0, Vec::len)
    }

    pub fn network_units(&self) -> u64 {
        self.net_in.iter().flatten().sum()
    }

    /// Compute time plus network units.
    pub fn makespan(&self) -> f64 {
        self.compute_time + self.network_units() as f64
    }

    /// Adds `other` phase by phase; compute times add because executions
    /// run one after another.
    pub fn absorb(&mut self, other: &BspTrace) {
        merge_rows(&mut self.loads, &other.loads, |a, b| *a += b);
        merge_rows(&mut self.net_in, &other.net_in, |a, b| *a += b);
        self.accesses += other.accesses;
        self.edges_traversed += other.edges_traversed;
        self.edge_cut_messages += other.edge_cut_messages;
        self.compute_time += other.compute_time;
    }
}

fn merge_rows<T: Copy + Default>(dst: &mut Vec<Vec<T>>, src: &[Vec<T>], add: impl Fn(&mut T, T)) {
    for (i, row) in src.iter().enumerate() {
        if dst.len() <= i {
            dst.push(vec![T::default(); row.len()]);
        }
        for (d, &s) in dst[i].iter_mut().zip(row) {
            add(d, s);
        }
    }
}

/// Extent placements seen during an execution, consulted by the next one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CacheState {
    resident: HashSet<(u32, u32)>,
}

impl CacheState {
    pub fn contains(&self, extent: u32, node: u32) -> bool {
        self.resident.contains(&(extent, node))
    }

    pub fn len(&self) -> usize {
        self.resident.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resident.is_empty()
    }
}

/// Cache inputs for one execution: `warm` is read, `fill` collects what
/// this execution touched.
pub struct CacheModel<'a> {
    pub warm: Option<&'a CacheState>,
    pub factor: f64,
    pub fill: Option<&'a mut CacheState>,
}

/// Plays `trace` on the cluster described by `df`.
///
/// Each node processes its extents of a phase in ascending id order. When
/// `recorders` is given, node `n` records into `recorders[n]` every switch
/// between consecutive distinct extents it processes and every handoff
/// leaving one of its extents, weighted by message count. Trees listed in
/// `frozen` are left untouched.
pub fn execute(
    trace: &ExtentTrace,
    df: &DistributionFunction,
    mut cache: Option<CacheModel<'_>>,
    mut recorders: Option<(&mut [DnTree], &[bool])>,
) -> Result<BspTrace, SimError> {
    let n = df.num_nodes() as usize;
    if let Some(e) = trace.max_extent() {
        if e as usize >= df.num_extents() {
            return Err(SimError::Config(format!(
                "extent {e} outside the distribution function ({} extents)",
                df.num_extents()
            )));
        }
    }
    if let Some((trees, frozen)) = &recorders {
        if trees.len() != n || frozen.len() != n {
            return Err(SimError::Config(format!(
                "{} recorders for {n} nodes",
                trees.len()
            )));
        }
    }
    let mut out = BspTrace {
        edges_traversed: trace.edges_traversed,
        ..BspTrace::default()
    };
    let mut last_on_node: Vec<Option<u32>> = vec![None; n];
    for phase in &trace.phases {
        let mut loads = vec![0.0; n];
        last_on_node.iter_mut().for_each(|x| *x = None);
        for &(e, count) in phase {
            let node = df.node_of(e as usize);
            let mut cost = count as f64;
            if let Some(c) = cache.as_mut() {
                if c.warm.is_some_and(|w| w.contains(e, node)) {
                    cost *= c.factor;
                }
                if let Some(fill) = c.fill.as_deref_mut() {
                    fill.resident.insert((e, node));
                }
            }
            loads[node as usize] += cost;
            out.accesses += count;
            if let Some((trees, frozen)) = recorders.as_mut() {
                let slot = &mut last_on_node[node as usize];
                if let Some(prev) = *slot {
                    if !frozen[node as usize] {
                        trees[node as usize].record(prev as u64, e as u64)?;
                    }
                }
                *slot = Some(e);
            }
        }
        out.compute_time += loads.iter().copied().fold(0.0, f64::max);
        out.loads.push(loads);
    }
    for boundary in &trace.boundaries {
        let mut net = vec![0u64; n];
        let mut pairs: HashSet<(u32, u32)> = HashSet::new();
        for h in boundary {
            let (a, b) = (df.node_of(h.src as usize), df.node_of(h.dst as usize));
            if a != b {
                out.edge_cut_messages += h.messages;
                if pairs.insert((h.src, b)) {
                    net[b as usize] += 1;
                }
            }
            if let Some((trees, frozen)) = recorders.as_mut() {
                if !frozen[a as usize] {
                    trees[a as usize].record_many(h.src as u64, h.dst as u64, h.messages)?;
                }
            }
        }
        out.net_in.push(net);
    }
    Ok(out)
}

/// Summary of a [`BspTrace`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub makespan: f64,
    /// Edges traversed per makespan unit.
    pub teps_proxy: f64,
    /// Population standard deviation of node load, per phase.
    pub load_stddev: Vec<f64>,
    /// Population standard deviation of incoming network units, per boundary.
    pub net_stddev: Vec<f64>,
    pub edge_cut_messages: u64,
    pub network_units: u64,
    pub accesses: u64,
    pub edges_traversed: u64,
}

impl RunMetrics {
    pub fn mean_load_stddev(&self) -> f64 {
        mean(&self.load_stddev)
    }

    pub fn mean_net_stddev(&self) -> f64 {
        mean(&self.net_stddev)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn population_stddev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn metrics(trace: &BspTrace) -> RunMetrics {
    let makespan = trace.makespan();
    let teps_proxy = if makespan > 0.0 {
        trace.edges_traversed as f64 / makespan
    } else {
        0.0
    };
    RunMetrics {
        makespan,
        teps_proxy,
        load_stddev: trace.loads.iter().map(|l| population_stddev(l)).collect(),
        net_stddev: trace
            .net_in
            .iter()
            .map(|l| population_stddev(&l.iter().map(|&x| x as f64).collect::<Vec<_>>()))
            .collect(),
        edge_cut_messages: trace.edge_cut_messages,
        network_units: trace.network_units(),
        accesses: trace.accesses,
        edges_traversed: trace.edges_traversed,
    }
}
