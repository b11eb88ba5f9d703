use super::{
    check_dims, check_feasible_bound, AccessGraph, ConstraintMatrix, PartitionEngine,
    PartitionError, PartitionSpec, Partitioning, LOAD_EPS,
};

/// Upper bound on assignments enumerated by [`partition_exhaustive`].
pub const MAX_EXHAUSTIVE_CANDIDATES: u128 = 1_000_000;

/// Global optimum by enumeration. Vertex 0 is pinned to part 0 and
/// assignments are visited in lexicographic order, so among equal cuts the
/// lexicographically smallest assignment wins.
pub fn partition_exhaustive(
    g: &AccessGraph,
    c: &ConstraintMatrix,
    spec: &PartitionSpec,
) -> Result<Partitioning, PartitionError> {
    check_dims(g, c, Some(spec))?;
    let n = g.num_vertices();
    let k = spec.num_parts();
    if n == 0 {
        return Partitioning::new(Vec::new(), k);
    }
    let candidates = (k as u128).checked_pow(n as u32 - 1).unwrap_or(u128::MAX);
    if candidates > MAX_EXHAUSTIVE_CANDIDATES {
        return Err(PartitionError::TooLarge(candidates));
    }
    check_feasible_bound(c, spec)?;

    let caps = spec.caps();
    let nc = c.num_constraints();
    let edges: Vec<_> = g.edges().collect();
    let mut assign = vec![0usize; n];
    let mut loads = vec![0.0; k * nc];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        loads.iter_mut().for_each(|l| *l = 0.0);
        for (v, &p) in assign.iter().enumerate() {
            for (i, w) in c.vertex(v).iter().enumerate() {
                loads[p * nc + i] += w;
            }
        }
        let feasible = loads
            .iter()
            .enumerate()
            .all(|(j, l)| *l <= caps[j % nc] + LOAD_EPS);
        if feasible {
            let cut: f64 = edges
                .iter()
                .filter(|&&(u, v, _)| assign[u] != assign[v])
                .map(|e| e.2)
                .sum();
            let better = match &best {
                None => true,
                Some((b, _)) => cut < b - 1e-9 * b.abs().max(1.0),
            };
            if better {
                best = Some((cut, assign.clone()));
            }
        }
        // odometer over vertices 1..n, last vertex fastest
        let mut pos = n - 1;
        loop {
            if pos == 0 {
                return match best {
                    Some((_, a)) => Partitioning::new(a, k),
                    None => Err(PartitionError::Infeasible(
                        "no assignment meets every tolerance".into(),
                    )),
                };
            }
            assign[pos] += 1;
            if assign[pos] < k {
                break;
            }
            assign[pos] = 0;
            pos -= 1;
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExhaustivePartitioner;

impl PartitionEngine for ExhaustivePartitioner {
    fn partition(
        &self,
        g: &AccessGraph,
        c: &ConstraintMatrix,
        spec: &PartitionSpec,
    ) -> Result<Partitioning, PartitionError> {
        partition_exhaustive(g, c, spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgeless_tie_break() {
        let g = AccessGraph::empty(4);
        let c = ConstraintMatrix::uniform(4);
        let spec = PartitionSpec::new(2, vec![1.0]).unwrap();
        let p = partition_exhaustive(&g, &c, &spec).unwrap();
        assert_eq!(p.parts(), &[0, 0, 1, 1]);
    }

    #[test]
    fn guards() {
        let g = AccessGraph::empty(30);
        let c = ConstraintMatrix::uniform(30);
        let spec = PartitionSpec::new(2, vec![1.05]).unwrap();
        assert!(matches!(
            partition_exhaustive(&g, &c, &spec),
            Err(PartitionError::TooLarge(_))
        ));
        // 5 vertices cannot split 2 ways within 5%
        let g = AccessGraph::empty(5);
        let c = ConstraintMatrix::uniform(5);
        assert!(matches!(
            partition_exhaustive(&g, &c, &spec),
            Err(PartitionError::Infeasible(_))
        ));
    }
}
