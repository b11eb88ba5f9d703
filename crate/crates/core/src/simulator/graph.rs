use crate::workload::{RmatParams, RmatSampler};

use super::SimError;

/// Default R-MAT quadrant probabilities for synthetic graphs.
pub const GRAPH_RMAT_P: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

/// Undirected adjacency of one edge type, in CSR form with sorted,
/// duplicate-free neighbor lists and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Layer {
    pub fn from_edges(num_vertices: usize, edges: &[(u32, u32)]) -> Self {
        let mut degree = vec![0usize; num_vertices];
        for &(u, v) in edges {
            if u != v {
                degree[u as usize] += 1;
                degree[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(num_vertices + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..num_vertices].to_vec();
        let mut targets = vec![0u32; offsets[num_vertices]];
        for &(u, v) in edges {
            if u != v {
                targets[fill[u as usize]] = v;
                fill[u as usize] += 1;
                targets[fill[v as usize]] = u;
                fill[v as usize] += 1;
            }
        }
        // sort and dedup each list, then compact
        let mut compact_offsets = Vec::with_capacity(num_vertices + 1);
        compact_offsets.push(0);
        let mut out = Vec::with_capacity(targets.len());
        for v in 0..num_vertices {
            let list = &mut targets[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            let start = out.len();
            for &t in list.iter() {
                if out.len() == start || *out.last().unwrap() != t {
                    out.push(t);
                }
            }
            compact_offsets.push(out.len());
        }
        out.shrink_to_fit();
        Self {
            offsets: compact_offsets,
            targets: out,
        }
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Undirected edges, each counted once.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }
}

/// Graph whose adjacency is split into typed layers. Each layer is a data
/// structure with its own extents: vertex `v` of layer `l` lives in extent
/// `l * extents_per_layer + v / extent_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    num_vertices: usize,
    extent_size: usize,
    layers: Vec<Layer>,
}

impl SyntheticGraph {
    pub fn new(
        num_vertices: usize,
        extent_size: usize,
        layers: Vec<Layer>,
    ) -> Result<Self, SimError> {
        if extent_size == 0 {
            return Err(SimError::Config("extent_size must be >= 1".into()));
        }
        if num_vertices == 0 || num_vertices > u32::MAX as usize {
            return Err(SimError::Config(format!("bad vertex count {num_vertices}")));
        }
        if layers.is_empty() {
            return Err(SimError::Config(
                "at least one edge layer is required".into(),
            ));
        }
        if let Some(l) = layers.iter().find(|l| l.offsets.len() != num_vertices + 1) {
            return Err(SimError::Config(format!(
                "layer covers {} vertices, graph has {num_vertices}",
                l.offsets.len() - 1
            )));
        }
        Ok(Self {
            num_vertices,
            extent_size,
            layers,
        })
    }

    /// R-MAT graph with `2^scale` vertices and `mean_degree * 2^scale / 2`
    /// sampled edges (self-loops and repeats dropped).
    pub fn rmat(
        scale: u32,
        mean_degree: u32,
        p: [f64; 4],
        extent_size: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        let n = 1usize << scale;
        let layer = rmat_layer(scale, mean_degree, p, seed)?;
        Self::new(n, extent_size, vec![layer])
    }

    /// Two edge types over the same vertices, for two-hop queries: layer 0
    /// is the first hop, layer 1 the second.
    pub fn typed(
        scale: u32,
        mean_degree: u32,
        p: [f64; 4],
        extent_size: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        let n = 1usize << scale;
        let a = rmat_layer(scale, mean_degree, p, seed)?;
        let b = rmat_layer(scale, mean_degree, p, seed ^ 0x5EED_0F0B)?;
        Self::new(n, extent_size, vec![a, b])
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn extent_size(&self) -> usize {
        self.extent_size
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, l: usize) -> &Layer {
        &self.layers[l]
    }

    pub fn extents_per_layer(&self) -> usize {
        self.num_vertices.div_ceil(self.extent_size)
    }

    pub fn num_extents(&self) -> usize {
        self.extents_per_layer() * self.layers.len()
    }

    pub fn extent_of(&self, layer: usize, v: u32) -> u32 {
        (layer * self.extents_per_layer() + v as usize / self.extent_size) as u32
    }

    /// Data structure (layer) of every extent.
    pub fn extent_tags(&self) -> Vec<usize> {
        let per = self.extents_per_layer();
        (0..self.num_extents()).map(|e| e / per).collect()
    }

    pub(crate) fn check_vertex(&self, v: u32) -> Result<(), SimError> {
        if (v as usize) < self.num_vertices {
            Ok(())
        } else {
            Err(SimError::UnknownVertex(v))
        }
    }
}

fn rmat_layer(scale: u32, mean_degree: u32, p: [f64; 4], seed: u64) -> Result<Layer, SimError> {
    if !(1..=24).contains(&scale) {
        return Err(SimError::Config(format!(
            "graph scale {scale} outside 1..=24"
        )));
    }
    let n = 1usize << scale;
    let m = n * mean_degree as usize / 2;
    let params = RmatParams::new(p, scale, seed)?;
    let edges: Vec<(u32, u32)> = RmatSampler::new(params)
        .take(m)
        .map(|(u, v)| (u as u32, v as u32))
        .collect();
    Ok(Layer::from_edges(n, &edges))
}
