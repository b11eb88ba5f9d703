//! Horizontal multi-constraint partitioning of the access graph.
//!
//! Find `P: V -> [0, num_parts)` minimizing the edge cut subject to
//! `l_i <= c_i` for every constraint, where
//! `l_i = num_parts * max_j sum_{v in part j} w_i^v`.

mod constraints;
mod exhaustive;
mod graph;
mod heuristic;

use std::io::{BufRead, Write};

use thiserror::Error;

pub use crate::distribution::derive_distribution;
pub use constraints::ConstraintMatrix;
pub use exhaustive::{partition_exhaustive, ExhaustivePartitioner, MAX_EXHAUSTIVE_CANDIDATES};
pub use graph::AccessGraph;
pub use heuristic::{partition_heuristic, HeuristicPartitioner};

/// Per-constraint tolerance used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1.05;

/// Slack on load comparisons; constraint sums are floating point.
pub(crate) const LOAD_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid weight {0}")]
    InvalidWeight(f64),
    #[error("constraint {0} has zero total weight")]
    EmptyConstraint(usize),
    #[error("invalid partition spec: {0}")]
    InvalidSpec(String),
    #[error("no partitioning satisfies the tolerances ({0})")]
    Infeasible(String),
    #[error("instance too large for exhaustive search: {0} candidate assignments")]
    TooLarge(u128),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Number of parts and the allowed imbalance per constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    num_parts: usize,
    tolerance: Vec<f64>,
}

impl PartitionSpec {
    pub fn new(num_parts: usize, tolerance: Vec<f64>) -> Result<Self, PartitionError> {
        if num_parts == 0 {
            return Err(PartitionError::InvalidSpec("num_parts must be >= 1".into()));
        }
        if let Some(c) = tolerance.iter().find(|&&c| c.is_nan() || c < 1.0) {
            return Err(PartitionError::InvalidSpec(format!(
                "tolerance {c} below 1"
            )));
        }
        Ok(Self {
            num_parts,
            tolerance,
        })
    }

    /// [`DEFAULT_TOLERANCE`] on each of `num_constraints` constraints.
    pub fn with_default_tolerance(
        num_parts: usize,
        num_constraints: usize,
    ) -> Result<Self, PartitionError> {
        Self::new(num_parts, vec![DEFAULT_TOLERANCE; num_constraints])
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn tolerance(&self) -> &[f64] {
        &self.tolerance
    }

    /// Largest per-part sum allowed for constraint `i`.
    pub(crate) fn caps(&self) -> Vec<f64> {
        self.tolerance
            .iter()
            .map(|c| c / self.num_parts as f64)
            .collect()
    }
}

/// Total map from vertex to part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partitioning {
    parts: Vec<usize>,
    num_parts: usize,
}

impl Partitioning {
    pub fn new(parts: Vec<usize>, num_parts: usize) -> Result<Self, PartitionError> {
        if let Some(&p) = parts.iter().find(|&&p| p >= num_parts) {
            return Err(PartitionError::InvalidSpec(format!(
                "part {p} out of range for {num_parts} parts"
            )));
        }
        Ok(Self { parts, num_parts })
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.parts[v]
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Vertices of each part, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_parts];
        for (v, &p) in self.parts.iter().enumerate() {
            out[p].push(v);
        }
        out
    }

    /// Applies a permutation of part labels.
    pub fn relabeled(&self, map: &[usize]) -> Result<Self, PartitionError> {
        Self::new(self.parts.iter().map(|&p| map[p]).collect(), self.num_parts)
    }

    /// `extent_id,node_id` rows with a header.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "extent_id,node_id")?;
        for (v, p) in self.parts.iter().enumerate() {
            writeln!(w, "{v},{p}")?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead, num_parts: usize) -> Result<Self, PartitionError> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| PartitionError::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("extent_id")) {
                continue;
            }
            let (e, p) = line
                .split_once(',')
                .and_then(|(a, b)| {
                    Some((
                        a.trim().parse::<usize>().ok()?,
                        b.trim().parse::<usize>().ok()?,
                    ))
                })
                .ok_or_else(|| PartitionError::Parse(format!("line {}: {line:?}", i + 1)))?;
            rows.push((e, p));
        }
        rows.sort_unstable();
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(PartitionError::Parse(
                "extent ids must be dense and unique".into(),
            ));
        }
        Self::new(rows.into_iter().map(|r| r.1).collect(), num_parts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMetrics {
    pub edge_cut: f64,
    /// `l_i` per constraint.
    pub imbalance: Vec<f64>,
}

impl PartitionMetrics {
    pub fn satisfies(&self, spec: &PartitionSpec) -> bool {
        self.imbalance
            .iter()
            .zip(spec.tolerance())
            .all(|(l, c)| *l <= c + LOAD_EPS)
    }
}

pub(crate) fn check_dims(
    g: &AccessGraph,
    c: &ConstraintMatrix,
    spec: Option<&PartitionSpec>,
) -> Result<(), PartitionError> {
    if g.num_vertices() != c.num_vertices() {
        return Err(PartitionError::DimensionMismatch(format!(
            "graph has {} vertices, constraints cover {}",
            g.num_vertices(),
            c.num_vertices()
        )));
    }
    if let Some(spec) = spec {
        if spec.tolerance().len() != c.num_constraints() {
            return Err(PartitionError::DimensionMismatch(format!(
                "{} tolerances for {} constraints",
                spec.tolerance().len(),
                c.num_constraints()
            )));
        }
    }
    Ok(())
}

/// Edge cut and imbalance vector of `p`.
pub fn evaluate(
    g: &AccessGraph,
    c: &ConstraintMatrix,
    p: &Partitioning,
) -> Result<PartitionMetrics, PartitionError> {
    check_dims(g, c, None)?;
    if p.len() != g.num_vertices() {
        return Err(PartitionError::DimensionMismatch(format!(
            "partitioning covers {} vertices, graph has {}",
            p.len(),
            g.num_vertices()
        )));
    }
    let edge_cut = g
        .edges()
        .filter(|&(u, v, _)| p.part_of(u) != p.part_of(v))
        // fold from +0.0: an empty float sum is -0.0
        .fold(0.0, |acc, e| acc + e.2);
    let nc = c.num_constraints();
    let k = p.num_parts();
    let mut sums = vec![0.0; k * nc];
    for v in 0..p.len() {
        let part = p.part_of(v);
        for (i, w) in c.vertex(v).iter().enumerate() {
            sums[part * nc + i] += w;
        }
    }
    let imbalance = (0..nc)
        .map(|i| k as f64 * (0..k).map(|j| sums[j * nc + i]).fold(0.0, f64::max))
        .collect();
    Ok(PartitionMetrics {
        edge_cut,
        imbalance,
    })
}

/// Lower bound on `l_i` that no assignment can beat: one part must hold the
/// heaviest vertex.
pub(crate) fn check_feasible_bound(
    c: &ConstraintMatrix,
    spec: &PartitionSpec,
) -> Result<(), PartitionError> {
    let k = spec.num_parts() as f64;
    for (i, &tol) in spec.tolerance().iter().enumerate() {
        let heaviest = (0..c.num_vertices())
            .map(|v| c.weight(v, i))
            .fold(0.0, f64::max);
        let bound = (k * heaviest).max(1.0);
        if bound > tol + LOAD_EPS {
            return Err(PartitionError::Infeasible(format!(
                "constraint {i} has imbalance at least {bound:.4} > tolerance {tol}"
            )));
        }
    }
    Ok(())
}

/// Seam for swapping the partitioning engine behind the same contract.
pub trait PartitionEngine {
    fn partition(
        &self,
        g: &AccessGraph,
        c: &ConstraintMatrix,
        spec: &PartitionSpec,
    ) -> Result<Partitioning, PartitionError>;
}
