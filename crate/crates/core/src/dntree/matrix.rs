use std::fmt;

/// Dense square matrix of nonnegative transition weights (exact `M` or the
/// reconstruction `M^`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    side: usize,
    cells: Vec<f64>,
}

impl TransitionMatrix {
    pub fn zeros(side: usize) -> Self {
        Self {
            side,
            cells: vec![0.0; side * side],
        }
    }

    /// Builds a matrix from rows. Panics if the rows are not square.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let side = rows.len();
        let mut cells = Vec::with_capacity(side * side);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), side, "matrix rows must be square");
            cells.extend_from_slice(row);
        }
        Self { side, cells }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.cells[row * self.side + col] = value;
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        self.cells[row * self.side + col] += value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.side..(row + 1) * self.side]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// `M + M^T`, the adjacency of the undirected access graph.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.side);
        for i in 0..self.side {
            for j in 0..self.side {
                out.set(i, j, self.get(i, j) + self.get(j, i));
            }
        }
        out
    }

    /// Nearest integer per cell, halves rounded up.
    pub fn rounded(&self) -> Vec<Vec<i64>> {
        (0..self.side)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|&v| (v + 0.5).floor() as i64)
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.side {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.3}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_rounding() {
        let m = TransitionMatrix::from_rows(&[[0.5, 1.49], [2.5, 6.538]]);
        assert_eq!(m.rounded(), vec![vec![1, 1], vec![3, 7]]);
    }

    #[test]
    fn symmetrize() {
        let m = TransitionMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let s = m.symmetrized();
        assert_eq!(s.row(0), &[2.0, 5.0]);
        assert_eq!(s.row(1), &[5.0, 8.0]);
    }
}
