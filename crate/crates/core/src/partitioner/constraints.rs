use super::PartitionError;

/// Per-vertex balancing weights, one column per constraint. Every column is
/// normalized to sum to 1 over the whole graph.
///
/// Column 0 is the uniform size constraint. With data-structure tags,
/// column `1 + d` is the indicator of data structure `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    num_vertices: usize,
    num_constraints: usize,
    weights: Vec<f64>,
}

impl ConstraintMatrix {
    pub fn uniform(num_vertices: usize) -> Self {
        let w = if num_vertices == 0 {
            0.0
        } else {
            1.0 / num_vertices as f64
        };
        Self {
            num_vertices,
            num_constraints: 1,
            weights: vec![w; num_vertices],
        }
    }

    /// Uniform column plus one indicator column per data structure.
    /// `tags[v]` is the data structure vertex `v` belongs to.
    pub fn with_tags(tags: &[usize], num_structures: usize) -> Result<Self, PartitionError> {
        let n = tags.len();
        let mut columns = vec![vec![1.0; n]];
        for d in 0..num_structures {
            columns.push(
                tags.iter()
                    .map(|&t| if t == d { 1.0 } else { 0.0 })
                    .collect(),
            );
        }
        if let Some(&bad) = tags.iter().find(|&&t| t >= num_structures) {
            return Err(PartitionError::DimensionMismatch(format!(
                "tag {bad} but only {num_structures} data structures"
            )));
        }
        Self::from_columns(&columns)
    }

    /// Normalizes raw nonnegative columns (each of length `num_vertices`).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, PartitionError> {
        let nc = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if nc == 0 {
            return Err(PartitionError::DimensionMismatch(
                "at least one constraint is required".into(),
            ));
        }
        let mut weights = vec![0.0; n * nc];
        for (i, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(PartitionError::DimensionMismatch(format!(
                    "constraint {i} has {} entries, expected {n}",
                    col.len()
                )));
            }
            if let Some(&w) = col.iter().find(|w| **w < 0.0 || !w.is_finite()) {
                return Err(PartitionError::InvalidWeight(w));
            }
            let sum: f64 = col.iter().sum();
            if sum <= 0.0 {
                return Err(PartitionError::EmptyConstraint(i));
            }
            for (v, &w) in col.iter().enumerate() {
                weights[v * nc + i] = w / sum;
            }
        }
        Ok(Self {
            num_vertices: n,
            num_constraints: nc,
            weights,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    /// Weight vector of vertex `v`.
    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.weights[v * self.num_constraints..(v + 1) * self.num_constraints]
    }

    pub fn weight(&self, v: usize, constraint: usize) -> f64 {
        self.weights[v * self.num_constraints + constraint]
    }
}
