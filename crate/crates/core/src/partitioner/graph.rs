use std::io::{BufRead, Write};

use super::PartitionError;
use crate::dntree::TransitionMatrix;

/// Weighted undirected graph over extents. Adjacency lists are sorted by
/// neighbor id; self-loops and zero-weight edges are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl AccessGraph {
    pub fn empty(num_vertices: usize) -> Self {
        Self {
            adj: vec![Vec::new(); num_vertices],
        }
    }

    /// Graph with adjacency `M + M^T`, diagonal dropped.
    pub fn from_matrix(m: &TransitionMatrix) -> Self {
        let n = m.side();
        let mut adj = vec![Vec::new(); n];
        for (u, list) in adj.iter_mut().enumerate() {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let w = m.get(u, v) + m.get(v, u);
                if w > 0.0 {
                    list.push((v, w));
                }
            }
        }
        Self { adj }
    }

    /// Builds from an undirected edge list; repeated edges accumulate.
    pub fn from_edges(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, PartitionError> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_vertices];
        for (u, v, w) in edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(PartitionError::DimensionMismatch(format!(
                    "edge ({u}, {v}) outside {num_vertices} vertices"
                )));
            }
            if w < 0.0 || !w.is_finite() {
                return Err(PartitionError::InvalidWeight(w));
            }
            if u == v || w == 0.0 {
                continue;
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        Ok(Self { adj })
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        match self.adj[u].binary_search_by_key(&v, |&(x, _)| x) {
            Ok(i) => self.adj[u][i].1,
            Err(_) => 0.0,
        }
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges().count()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().fold(0.0, |acc, e| acc + e.2)
    }

    /// Same graph with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            adj: self
                .adj
                .iter()
                .map(|l| l.iter().map(|&(v, w)| (v, w * factor)).collect())
                .collect(),
        }
    }

    /// `# vertices N` header, then one `u v weight` line per edge.
    pub fn write_edge_list(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# vertices {}", self.num_vertices())?;
        for (u, v, weight) in self.edges() {
            writeln!(w, "{u} {v} {weight}")?;
        }
        Ok(())
    }

    pub fn read_edge_list(r: impl BufRead) -> Result<Self, PartitionError> {
        let mut n = None;
        let mut edges = Vec::new();
        let mut max_id = 0;
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| PartitionError::Parse(e.to_string()))?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# vertices") {
                n = Some(rest.trim().parse().map_err(|_| {
                    PartitionError::Parse(format!("line {}: bad vertex count", i + 1))
                })?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || PartitionError::Parse(format!("line {}: expected `u v weight`", i + 1));
            let mut it = line.split_whitespace();
            let u: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let v: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let w: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            max_id = max_id.max(u + 1).max(v + 1);
            edges.push((u, v, w));
        }
        Self::from_edges(n.unwrap_or(max_id), edges)
    }
}
