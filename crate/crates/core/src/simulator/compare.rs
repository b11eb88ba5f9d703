use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::distribution::DistributionFunction;

use super::bsp::{metrics, BspTrace, RunMetrics};
use super::cluster::{run_execution, Cluster, ClusterConfig, CycleOutcome};
use super::{trace_query, Query, SimError, SyntheticGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    /// Hash placement, never changed.
    Static,
    /// Hash placement until the first repartition, then learned placements.
    Dydap,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Static => "static",
            System::Dydap => "dydap",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemRun {
    pub system: System,
    /// 1 for the cold first execution, 2 for the repeat.
    pub execution: u8,
    pub trace: BspTrace,
    pub metrics: RunMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// static 1, static 2, dydap 1, dydap 2.
    pub runs: Vec<SystemRun>,
    pub cycles: Vec<CycleOutcome>,
    pub final_distribution: DistributionFunction,
}

impl Comparison {
    pub fn run(&self, system: System, execution: u8) -> &SystemRun {
        self.runs
            .iter()
            .find(|r| r.system == system && r.execution == execution)
            .expect("every system runs twice")
    }

    pub fn static1(&self) -> &RunMetrics {
        &self.run(System::Static, 1).metrics
    }

    pub fn dydap1(&self) -> &RunMetrics {
        &self.run(System::Dydap, 1).metrics
    }

    pub fn dydap2(&self) -> &RunMetrics {
        &self.run(System::Dydap, 2).metrics
    }

    /// Writes `trace.csv`, `metrics.csv` and `stddev.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut trace = Vec::new();
        let mut summary = Vec::new();
        let mut stddev = Vec::new();
        self.write_trace_csv(&mut trace)?;
        self.write_metrics_csv(&mut summary)?;
        self.write_stddev_csv(&mut stddev)?;
        std::fs::write(dir.join("trace.csv"), trace)?;
        std::fs::write(dir.join("metrics.csv"), summary)?;
        std::fs::write(dir.join("stddev.csv"), stddev)
    }

    pub fn write_trace_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "system,execution,phase,node,load,net_in")?;
        for r in &self.runs {
            for (p, loads) in r.trace.loads.iter().enumerate() {
                for (node, load) in loads.iter().enumerate() {
                    let net = r.trace.net_in.get(p).map_or(0, |n| n[node]);
                    writeln!(w, "{},{},{p},{node},{load},{net}", r.system, r.execution)?;
                }
            }
        }
        Ok(())
    }

    pub fn write_metrics_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "system,execution,makespan,teps_proxy,edge_cut_messages")?;
        for r in &self.runs {
            let m = &r.metrics;
            writeln!(
                w,
                "{},{},{},{},{}",
                r.system, r.execution, m.makespan, m.teps_proxy, m.edge_cut_messages
            )?;
        }
        Ok(())
    }

    /// The last phase has no boundary after it, so its `net_stddev` is empty.
    pub fn write_stddev_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "system,execution,phase,load_stddev,net_stddev")?;
        for r in &self.runs {
            for (p, load) in r.metrics.load_stddev.iter().enumerate() {
                let net = r
                    .metrics
                    .net_stddev
                    .get(p)
                    .map_or(String::new(), |n| n.to_string());
                writeln!(w, "{},{},{p},{load},{net}", r.system, r.execution)?;
            }
        }
        Ok(())
    }
}

/// Runs `workload` twice on a static hash cluster and twice on an adaptive
/// cluster. The adaptive cluster records during its first execution and
/// repartitions every `repartition_interval` queries; its second execution
/// keeps the final distribution. Second executions see the cache left by
/// the first.
///
/// Fails if a repartition ever produces a larger cut on its own
/// reconstructed graph than the hash distribution does.
pub fn compare_systems(
    graph: &SyntheticGraph,
    workload: &[Query],
    config: &ClusterConfig,
) -> Result<Comparison, SimError> {
    let traces = workload
        .iter()
        .map(|q| trace_query(graph, q))
        .collect::<Result<Vec<_>, _>>()?;
    let tags = graph.extent_tags();
    let mut runs = Vec::with_capacity(4);
    let mut cycles = Vec::new();

    let mut cluster = Cluster::new(config.clone(), tags.clone())?;
    let (first, cache) = run_execution(&mut cluster, &traces, None, false, &mut cycles)?;
    let (second, _) = run_execution(&mut cluster, &traces, Some(&cache), false, &mut cycles)?;
    runs.push(system_run(System::Static, 1, first));
    runs.push(system_run(System::Static, 2, second));

    let mut cluster = Cluster::new(config.clone(), tags)?;
    let (first, cache) = run_execution(&mut cluster, &traces, None, true, &mut cycles)?;
    let (second, _) = run_execution(&mut cluster, &traces, Some(&cache), false, &mut cycles)?;
    runs.push(system_run(System::Dydap, 1, first));
    runs.push(system_run(System::Dydap, 2, second));

    for c in &cycles {
        if let CycleOutcome::Repartitioned {
            cut,
            hash_cut: Some(hash_cut),
            ..
        } = *c
        {
            if cut > hash_cut + 1e-9 * hash_cut.abs().max(1.0) {
                return Err(SimError::Invariant(format!(
                    "repartition cut {cut} exceeds hash cut {hash_cut}"
                )));
            }
        }
    }
    Ok(Comparison {
        runs,
        cycles,
        final_distribution: cluster.distribution().clone(),
    })
}

fn system_run(system: System, execution: u8, trace: BspTrace) -> SystemRun {
    SystemRun {
        system,
        execution,
        metrics: metrics(&trace),
        trace,
    }
}
