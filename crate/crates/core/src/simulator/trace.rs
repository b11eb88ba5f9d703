//! Placement-independent record of what a query touches.

use super::{SimError, SyntheticGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Query {
    /// Level-synchronous BFS over layer 0, at most `max_phases` levels.
    Bfs { root: u32, max_phases: usize },
    /// Neighbors over layer 0, then their neighbors over layer 1.
    TwoHop { user: u32 },
}

/// Messages from one extent to another across a phase boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handoff {
    pub src: u32,
    pub dst: u32,
    pub messages: u64,
}

/// Extent accesses of a query, independent of where the extents live.
///
/// `phases[p]` lists `(extent, accesses)` in ascending extent order;
/// `boundaries[p]` lists the handoffs from phase `p` to phase `p + 1`,
/// sorted by `(src, dst)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtentTrace {
    pub phases: Vec<Vec<(u32, u64)>>,
    pub boundaries: Vec<Vec<Handoff>>,
    pub edges_traversed: u64,
}

impl ExtentTrace {
    pub fn num_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn total_accesses(&self) -> u64 {
        self.phases.iter().flatten().map(|&(_, c)| c).sum()
    }

    pub fn max_extent(&self) -> Option<u32> {
        self.phases.iter().flatten().map(|&(e, _)| e).max()
    }
}

/// Runs `q` on `g` and records which extents each phase touches.
///
/// Every frontier vertex is one access to its extent in the layer being
/// read. A frontier vertex sends one message to each neighbor that belongs
/// to the next frontier; messages are grouped by (source extent,
/// destination extent).
pub fn trace_query(g: &SyntheticGraph, q: &Query) -> Result<ExtentTrace, SimError> {
    match *q {
        Query::Bfs { root, max_phases } => trace_bfs(g, root, max_phases),
        Query::TwoHop { user } => trace_two_hop(g, user),
    }
}

fn trace_bfs(g: &SyntheticGraph, root: u32, max_phases: usize) -> Result<ExtentTrace, SimError> {
    g.check_vertex(root)?;
    if max_phases == 0 {
        return Err(SimError::Config("max_phases must be >= 1".into()));
    }
    let layer = g.layer(0);
    let mut level = vec![u32::MAX; g.num_vertices()];
    level[root as usize] = 0;
    let mut frontier = vec![root];
    let mut out = ExtentTrace::default();
    for p in 0..max_phases {
        if frontier.is_empty() {
            break;
        }
        frontier.sort_unstable();
        out.phases.push(group_accesses(g, 0, &frontier));
        let last = p + 1 == max_phases;
        let mut next = Vec::new();
        let mut handoffs = Vec::new();
        for &u in &frontier {
            out.edges_traversed += layer.degree(u) as u64;
            if last {
                continue;
            }
            for &v in layer.neighbors(u) {
                let lv = &mut level[v as usize];
                if *lv == u32::MAX {
                    *lv = p as u32 + 1;
                    next.push(v);
                }
                if *lv == p as u32 + 1 {
                    handoffs.push((g.extent_of(0, u), g.extent_of(0, v)));
                }
            }
        }
        if !next.is_empty() {
            out.boundaries.push(group_handoffs(handoffs));
        }
        frontier = next;
    }
    Ok(out)
}

fn trace_two_hop(g: &SyntheticGraph, user: u32) -> Result<ExtentTrace, SimError> {
    g.check_vertex(user)?;
    if g.num_layers() < 2 {
        return Err(SimError::Config(
            "two-hop queries need a typed graph".into(),
        ));
    }
    let (a, b) = (g.layer(0), g.layer(1));
    let mut out = ExtentTrace::default();
    out.phases.push(group_accesses(g, 0, &[user]));
    out.edges_traversed += a.degree(user) as u64;
    let hop: Vec<u32> = a.neighbors(user).to_vec();
    if hop.is_empty() {
        return Ok(out);
    }
    let src = g.extent_of(0, user);
    out.boundaries.push(group_handoffs(
        hop.iter().map(|&v| (src, g.extent_of(1, v))).collect(),
    ));
    out.phases.push(group_accesses(g, 1, &hop));
    out.edges_traversed += hop.iter().map(|&v| b.degree(v) as u64).sum::<u64>();
    Ok(out)
}

/// `vertices` must be sorted; extents are monotone in vertex id.
fn group_accesses(g: &SyntheticGraph, layer: usize, vertices: &[u32]) -> Vec<(u32, u64)> {
    let mut out: Vec<(u32, u64)> = Vec::new();
    for &v in vertices {
        let e = g.extent_of(layer, v);
        match out.last_mut() {
            Some((last, c)) if *last == e => *c += 1,
            _ => out.push((e, 1)),
        }
    }
    out
}

fn group_handoffs(mut pairs: Vec<(u32, u32)>) -> Vec<Handoff> {
    pairs.sort_unstable();
    let mut out: Vec<Handoff> = Vec::new();
    for (src, dst) in pairs {
        match out.last_mut() {
            Some(h) if h.src == src && h.dst == dst => h.messages += 1,
            _ => out.push(Handoff {
                src,
                dst,
                messages: 1,
            }),
        }
    }
    out
}
