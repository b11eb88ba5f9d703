//! Seeded greedy region growing followed by boundary refinement.
//!
//! Each restart grows `num_parts` regions from random seed vertices: the
//! least-filled part repeatedly absorbs the unassigned vertex most strongly
//! connected to it that still fits under every constraint cap. If the grown
//! assignment violates a tolerance it is repaired by load-reducing moves, and
//! if that fails it is rebuilt by best-fit-decreasing dealing. Refinement
//! then applies cut-reducing single-vertex moves and pairwise swaps that keep
//! every constraint within tolerance, until a pass changes nothing or the
//! pass cap is hit. The best feasible restart wins.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    check_dims, check_feasible_bound, AccessGraph, ConstraintMatrix, PartitionEngine,
    PartitionError, PartitionSpec, Partitioning, LOAD_EPS,
};

const UNASSIGNED: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct HeuristicPartitioner {
    pub seed: u64,
    /// Cap on refinement passes per restart.
    pub max_passes: usize,
    /// Independent region-growing restarts.
    pub restarts: usize,
    /// Assignments refined as extra candidates (e.g. the current
    /// distribution). Infeasible ones are repaired first.
    pub warm_starts: Vec<Vec<usize>>,
}

impl Default for HeuristicPartitioner {
    fn default() -> Self {
        Self {
            seed: 0,
            max_passes: 32,
            restarts: 8,
            warm_starts: Vec::new(),
        }
    }
}

impl HeuristicPartitioner {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// [`HeuristicPartitioner`] with default passes and restarts.
pub fn partition_heuristic(
    g: &AccessGraph,
    c: &ConstraintMatrix,
    spec: &PartitionSpec,
    seed: u64,
) -> Result<Partitioning, PartitionError> {
    HeuristicPartitioner::with_seed(seed).partition(g, c, spec)
}

impl PartitionEngine for HeuristicPartitioner {
    fn partition(
        &self,
        g: &AccessGraph,
        c: &ConstraintMatrix,
        spec: &PartitionSpec,
    ) -> Result<Partitioning, PartitionError> {
        check_dims(g, c, Some(spec))?;
        let n = g.num_vertices();
        let k = spec.num_parts();
        if k == 1 || n == 0 {
            return Partitioning::new(vec![0; n], k);
        }
        check_feasible_bound(c, spec)?;

        let mut best: Option<State> = None;
        fn consider<'a>(best: &mut Option<State<'a>>, s: State<'a>) {
            if s.violation() > LOAD_EPS {
                return;
            }
            let better = match best {
                None => true,
                Some(b) => s.cut < b.cut - 1e-9 * b.cut.abs().max(1.0),
            };
            if better {
                *best = Some(s);
            }
        }

        for (i, warm) in self.warm_starts.iter().enumerate() {
            if warm.len() != n || warm.iter().any(|&p| p >= k) {
                return Err(PartitionError::DimensionMismatch(format!(
                    "warm start {i} does not fit {n} vertices / {k} parts"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (0xA5A5 + i as u64));
            let mut s = State::new(g, c, spec, warm.clone());
            s.repair();
            if s.violation() > LOAD_EPS {
                continue;
            }
            s.refine(&mut rng, self.max_passes);
            consider(&mut best, s);
        }

        for r in 0..self.restarts.max(1) {
            let mut rng = ChaCha8Rng::seed_from_u64(
                self.seed
                    .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64 + 1)),
            );
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut s = State::grow(g, c, spec, &order);
            s.repair();
            if s.violation() > LOAD_EPS {
                s = State::deal(g, c, spec, &order);
                s.repair();
            }
            if s.violation() > LOAD_EPS {
                continue;
            }
            s.refine(&mut rng, self.max_passes);
            consider(&mut best, s);
        }

        match best {
            Some(s) => Partitioning::new(s.part, k),
            None => Err(PartitionError::Infeasible(
                "heuristic found no assignment within tolerance".into(),
            )),
        }
    }
}

/// Assignment with incrementally maintained part loads, vertex-to-part
/// connectivity and edge cut.
struct State<'a> {
    g: &'a AccessGraph,
    c: &'a ConstraintMatrix,
    k: usize,
    nc: usize,
    caps: Vec<f64>,
    part: Vec<usize>,
    /// `loads[p * nc + i]`
    loads: Vec<f64>,
    /// `conn[v * k + p]`: edge weight from `v` into part `p`.
    conn: Vec<f64>,
    cut: f64,
    gain_eps: f64,
}

impl<'a> State<'a> {
    fn empty(g: &'a AccessGraph, c: &'a ConstraintMatrix, spec: &PartitionSpec) -> Self {
        let n = g.num_vertices();
        let k = spec.num_parts();
        let nc = c.num_constraints();
        Self {
            g,
            c,
            k,
            nc,
            caps: spec.caps(),
            part: vec![UNASSIGNED; n],
            loads: vec![0.0; k * nc],
            conn: vec![0.0; n * k],
            cut: 0.0,
            gain_eps: 1e-9 * g.total_weight().max(1.0),
        }
    }

    fn new(
        g: &'a AccessGraph,
        c: &'a ConstraintMatrix,
        spec: &PartitionSpec,
        assignment: Vec<usize>,
    ) -> Self {
        let mut s = Self::empty(g, c, spec);
        for (v, &p) in assignment.iter().enumerate() {
            s.assign(v, p);
        }
        s
    }

    fn fill_of(&self, p: usize) -> f64 {
        (0..self.nc)
            .map(|i| self.loads[p * self.nc + i] / self.caps[i])
            .fold(0.0, f64::max)
    }

    fn fits(&self, v: usize, p: usize) -> bool {
        self.c
            .vertex(v)
            .iter()
            .enumerate()
            .all(|(i, w)| self.loads[p * self.nc + i] + w <= self.caps[i] + LOAD_EPS)
    }

    fn part_violation(&self, p: usize) -> f64 {
        (0..self.nc)
            .map(|i| (self.loads[p * self.nc + i] - self.caps[i]).max(0.0))
            .sum()
    }

    fn violation(&self) -> f64 {
        (0..self.k).map(|p| self.part_violation(p)).sum()
    }

    /// Places an unassigned vertex.
    fn assign(&mut self, v: usize, p: usize) {
        debug_assert_eq!(self.part[v], UNASSIGNED);
        self.part[v] = p;
        for (i, w) in self.c.vertex(v).iter().enumerate() {
            self.loads[p * self.nc + i] += w;
        }
        for &(u, w) in self.g.neighbors(v) {
            self.conn[u * self.k + p] += w;
            let q = self.part[u];
            if q != UNASSIGNED && q != p {
                self.cut += w;
            }
        }
    }

    fn move_vertex(&mut self, v: usize, to: usize) {
        let from = self.part[v];
        if from == to {
            return;
        }
        self.cut += self.conn[v * self.k + from] - self.conn[v * self.k + to];
        self.part[v] = to;
        for (i, w) in self.c.vertex(v).iter().enumerate() {
            self.loads[from * self.nc + i] -= w;
            self.loads[to * self.nc + i] += w;
        }
        for &(u, w) in self.g.neighbors(v) {
            self.conn[u * self.k + from] -= w;
            self.conn[u * self.k + to] += w;
        }
    }

    fn grow(
        g: &'a AccessGraph,
        c: &'a ConstraintMatrix,
        spec: &PartitionSpec,
        order: &[usize],
    ) -> Self {
        let mut s = Self::empty(g, c, spec);
        let k = s.k;
        for (p, &v) in order.iter().take(k).enumerate() {
            s.assign(v, p);
        }
        let mut unassigned: Vec<usize> = order.iter().skip(k).copied().collect();
        let mut closed = vec![false; k];
        while !unassigned.is_empty() {
            let Some(p) = (0..k)
                .filter(|&p| !closed[p])
                .min_by(|&a, &b| s.fill_of(a).total_cmp(&s.fill_of(b)))
            else {
                break;
            };
            // strongest frontier vertex first, else the next fitting vertex
            let mut pick: Option<(usize, f64)> = None;
            for (idx, &v) in unassigned.iter().enumerate() {
                let w = s.conn[v * k + p];
                if w > 0.0 && pick.is_none_or(|(_, bw)| w > bw) && s.fits(v, p) {
                    pick = Some((idx, w));
                }
            }
            if pick.is_none() {
                pick = unassigned
                    .iter()
                    .position(|&v| s.fits(v, p))
                    .map(|idx| (idx, 0.0));
            }
            match pick {
                Some((idx, _)) => {
                    let v = unassigned.remove(idx);
                    s.assign(v, p);
                }
                None => closed[p] = true,
            }
        }
        for v in unassigned {
            let p = s.least_filled_after(v);
            s.assign(v, p);
        }
        s
    }

    /// Best-fit decreasing: heaviest vertices first, each into the part whose
    /// fill stays lowest.
    fn deal(
        g: &'a AccessGraph,
        c: &'a ConstraintMatrix,
        spec: &PartitionSpec,
        order: &[usize],
    ) -> Self {
        let mut s = Self::empty(g, c, spec);
        let caps = s.caps.clone();
        let size = |v: usize| {
            c.vertex(v)
                .iter()
                .zip(&caps)
                .map(|(w, cap)| w / cap)
                .fold(0.0, f64::max)
        };
        let mut sorted = order.to_vec();
        sorted.sort_by(|&a, &b| size(b).total_cmp(&size(a)));
        for v in sorted {
            let p = s.least_filled_after(v);
            s.assign(v, p);
        }
        s
    }

    fn least_filled_after(&self, v: usize) -> usize {
        let w = self.c.vertex(v);
        (0..self.k)
            .min_by(|&a, &b| {
                let fa = self.fill_with(a, w);
                let fb = self.fill_with(b, w);
                fa.total_cmp(&fb)
            })
            .unwrap()
    }

    fn fill_with(&self, p: usize, w: &[f64]) -> f64 {
        (0..self.nc)
            .map(|i| (self.loads[p * self.nc + i] + w[i]) / self.caps[i])
            .fold(0.0, f64::max)
    }

    /// Violation of part `p` after removing `out` and adding `inn` weights.
    fn part_violation_with(&self, p: usize, out: Option<usize>, inn: Option<usize>) -> f64 {
        (0..self.nc)
            .map(|i| {
                let mut l = self.loads[p * self.nc + i];
                if let Some(v) = out {
                    l -= self.c.weight(v, i);
                }
                if let Some(v) = inn {
                    l += self.c.weight(v, i);
                }
                (l - self.caps[i]).max(0.0)
            })
            .sum()
    }

    /// Greedily removes tolerance violations, preferring the move or swap
    /// that reduces violation most and, among those, raises the cut least.
    fn repair(&mut self) {
        let n = self.part.len();
        for _ in 0..(4 * n * self.k).max(16) {
            if self.violation() <= LOAD_EPS {
                return;
            }
            let overloaded: Vec<usize> = (0..self.k)
                .filter(|&p| self.part_violation(p) > LOAD_EPS)
                .collect();
            // (violation reduction, cut delta, vertex, target part, swap partner)
            let mut best: Option<(f64, f64, usize, usize, Option<usize>)> = None;
            fn offer(
                best: &mut Option<(f64, f64, usize, usize, Option<usize>)>,
                cand: (f64, f64, usize, usize, Option<usize>),
            ) {
                let (red, dcut) = (cand.0, cand.1);
                if red <= LOAD_EPS {
                    return;
                }
                let better = match *best {
                    None => true,
                    Some((br, bc, ..)) => red > br + LOAD_EPS || (red > br - LOAD_EPS && dcut < bc),
                };
                if better {
                    *best = Some(cand);
                }
            }
            for v in 0..n {
                let a = self.part[v];
                if !overloaded.contains(&a) {
                    continue;
                }
                let before_a = self.part_violation(a);
                for b in (0..self.k).filter(|&b| b != a) {
                    let red = before_a + self.part_violation(b)
                        - self.part_violation_with(a, Some(v), None)
                        - self.part_violation_with(b, None, Some(v));
                    let dcut = self.conn[v * self.k + a] - self.conn[v * self.k + b];
                    offer(&mut best, (red, dcut, v, b, None));
                }
            }
            if best.is_none() {
                for u in 0..n {
                    let a = self.part[u];
                    if !overloaded.contains(&a) {
                        continue;
                    }
                    for v in 0..n {
                        let b = self.part[v];
                        if b == a {
                            continue;
                        }
                        let red = self.part_violation(a) + self.part_violation(b)
                            - self.part_violation_with(a, Some(u), Some(v))
                            - self.part_violation_with(b, Some(v), Some(u));
                        let dcut = -self.swap_gain(u, v);
                        offer(&mut best, (red, dcut, u, b, Some(v)));
                    }
                }
            }
            match best {
                Some((_, _, v, to, partner)) => {
                    let from = self.part[v];
                    self.move_vertex(v, to);
                    if let Some(u) = partner {
                        self.move_vertex(u, from);
                    }
                }
                None => return,
            }
        }
    }

    fn swap_gain(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.part[u], self.part[v]);
        let k = self.k;
        self.conn[u * k + b] - self.conn[u * k + a] + self.conn[v * k + a]
            - self.conn[v * k + b]
            - 2.0 * self.g.weight(u, v)
    }

    fn swap_fits(&self, u: usize, v: usize) -> bool {
        let (a, b) = (self.part[u], self.part[v]);
        (0..self.nc).all(|i| {
            let (wu, wv) = (self.c.weight(u, i), self.c.weight(v, i));
            self.loads[a * self.nc + i] - wu + wv <= self.caps[i] + LOAD_EPS
                && self.loads[b * self.nc + i] - wv + wu <= self.caps[i] + LOAD_EPS
        })
    }

    /// Cut-reducing moves and swaps that keep every constraint satisfied.
    fn refine(&mut self, rng: &mut ChaCha8Rng, max_passes: usize) {
        let n = self.part.len();
        let k = self.k;
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..max_passes {
            let mut changed = false;
            order.shuffle(rng);
            for &v in &order {
                let a = self.part[v];
                let mut best: Option<(f64, usize)> = None;
                for b in (0..k).filter(|&b| b != a) {
                    let gain = self.conn[v * k + b] - self.conn[v * k + a];
                    if gain > self.gain_eps
                        && best.is_none_or(|(bg, _)| gain > bg)
                        && self.fits_moved(v, b)
                    {
                        best = Some((gain, b));
                    }
                }
                if let Some((_, b)) = best {
                    self.move_vertex(v, b);
                    changed = true;
                }
            }
            for &u in &order {
                let a = self.part[u];
                let mut best: Option<(f64, usize)> = None;
                for v in 0..n {
                    let b = self.part[v];
                    if b == a || (self.conn[u * k + b] <= 0.0 && self.conn[v * k + a] <= 0.0) {
                        continue;
                    }
                    let gain = self.swap_gain(u, v);
                    if gain > self.gain_eps
                        && best.is_none_or(|(bg, _)| gain > bg)
                        && self.swap_fits(u, v)
                    {
                        best = Some((gain, v));
                    }
                }
                if let Some((_, v)) = best {
                    let b = self.part[v];
                    self.move_vertex(u, b);
                    self.move_vertex(v, a);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Whether `v` fits in `to` once removed from its current part.
    fn fits_moved(&self, v: usize, to: usize) -> bool {
        self.part[v] == to || self.fits(v, to)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitioner::{evaluate, partition_exhaustive};

    fn two_cliques() -> AccessGraph {
        let mut edges = Vec::new();
        for block in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((block + i, block + j, 5.0));
                }
            }
        }
        edges.push((0, 4, 1.0));
        edges.push((3, 7, 1.0));
        AccessGraph::from_edges(8, edges).unwrap()
    }

    #[test]
    fn separates_cliques() {
        let g = two_cliques();
        let c = ConstraintMatrix::uniform(8);
        let spec = PartitionSpec::with_default_tolerance(2, 1).unwrap();
        let p = partition_heuristic(&g, &c, &spec, 7).unwrap();
        let m = evaluate(&g, &c, &p).unwrap();
        assert_eq!(m.edge_cut, 2.0);
        assert!(m.satisfies(&spec));
        let opt = partition_exhaustive(&g, &c, &spec).unwrap();
        assert_eq!(evaluate(&g, &c, &opt).unwrap().edge_cut, 2.0);
    }

    #[test]
    fn single_part() {
        let g = two_cliques();
        let c = ConstraintMatrix::uniform(8);
        let spec = PartitionSpec::with_default_tolerance(1, 1).unwrap();
        let p = partition_heuristic(&g, &c, &spec, 3).unwrap();
        assert!(p.parts().iter().all(|&x| x == 0));
    }

    #[test]
    fn reports_infeasible_structure() {
        // data structure 1 holds a single vertex: it cannot be split in two
        let g = two_cliques();
        let c = ConstraintMatrix::with_tags(&[0, 0, 0, 0, 0, 0, 0, 1], 2).unwrap();
        let spec = PartitionSpec::with_default_tolerance(2, 3).unwrap();
        assert!(matches!(
            partition_heuristic(&g, &c, &spec, 1),
            Err(PartitionError::Infeasible(_))
        ));
    }

    #[test]
    fn warm_start_never_worsens() {
        let g = two_cliques();
        let c = ConstraintMatrix::uniform(8);
        let spec = PartitionSpec::with_default_tolerance(2, 1).unwrap();
        let warm = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let h = HeuristicPartitioner {
            warm_starts: vec![warm],
            restarts: 1,
            ..HeuristicPartitioner::default()
        };
        let p = h.partition(&g, &c, &spec).unwrap();
        assert_eq!(evaluate(&g, &c, &p).unwrap().edge_cut, 2.0);
    }

    #[test]
    fn multi_constraint_balance() {
        // two structures interleaved; both must be split evenly
        let tags = [0, 1, 0, 1, 0, 1, 0, 1];
        let c = ConstraintMatrix::with_tags(&tags, 2).unwrap();
        let g = two_cliques();
        let spec = PartitionSpec::with_default_tolerance(2, 3).unwrap();
        let p = partition_heuristic(&g, &c, &spec, 11).unwrap();
        assert!(evaluate(&g, &c, &p).unwrap().satisfies(&spec));
    }
}
