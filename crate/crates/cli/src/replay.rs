use std::fmt::Write as _;

use anyhow::Result;
use dydap_core::golden;
use dydap_core::partitioner::{evaluate, partition_exhaustive};
use dydap_core::workload::{replay, AccessSequence};
use dydap_core::{
    AccessGraph, ConstraintMatrix, DnTree, DnTreeConfig, PartitionSpec, Partitioning,
    TransitionMatrix,
};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Report {
    pub accesses: usize,
    pub exact: Vec<Vec<i64>>,
    pub reconstructed: Vec<Vec<i64>>,
    pub adjacency: Vec<Vec<i64>>,
    pub splits: Vec<Vec<usize>>,
    pub cuts_exact: Vec<f64>,
    pub cuts_reconstructed: Vec<f64>,
    pub optimal_exact: Vec<usize>,
    pub optimal_reconstructed: Vec<usize>,
    pub mismatches: Vec<String>,
}

pub fn run(seq: &AccessSequence) -> Result<Report> {
    let config = DnTreeConfig::new(
        golden::EXTENTS,
        golden::BASE_THRESHOLD,
        golden::GROWTH_FACTOR,
    )?;
    let mut tree = DnTree::new(config);
    let mut m = TransitionMatrix::zeros(golden::EXTENTS as usize);
    replay(seq, &mut tree, &mut m)?;

    let exact = m.rounded();
    let reconstructed = tree.reconstruct_matrix().rounded();
    let adjacency = m.symmetrized().rounded();
    let g_exact = AccessGraph::from_matrix(&m);
    let g_rec = AccessGraph::from_matrix(&TransitionMatrix::from_rows(&to_f64(&reconstructed)));

    let n = golden::EXTENTS as usize;
    let c = ConstraintMatrix::uniform(n);
    let spec = PartitionSpec::with_default_tolerance(2, 1)?;
    let mut cuts_exact = Vec::new();
    let mut cuts_reconstructed = Vec::new();
    for split in &golden::SPLITS {
        let p = Partitioning::new(split.to_vec(), 2)?;
        cuts_exact.push(evaluate(&g_exact, &c, &p)?.edge_cut);
        cuts_reconstructed.push(evaluate(&g_rec, &c, &p)?.edge_cut);
    }
    let optimal_exact = partition_exhaustive(&g_exact, &c, &spec)?.parts().to_vec();
    let optimal_reconstructed = partition_exhaustive(&g_rec, &c, &spec)?.parts().to_vec();

    let mut mismatches = Vec::new();
    diff_matrix("M", &exact, &golden::EXACT, &mut mismatches);
    diff_matrix(
        "M^",
        &reconstructed,
        &golden::RECONSTRUCTED,
        &mut mismatches,
    );
    diff_matrix("M+M^T", &adjacency, &golden::ADJACENCY, &mut mismatches);
    diff_cuts("cut(M)", &cuts_exact, &golden::CUTS_EXACT, &mut mismatches);
    diff_cuts(
        "cut(M^)",
        &cuts_reconstructed,
        &golden::CUTS_RECONSTRUCTED,
        &mut mismatches,
    );
    for (name, got) in [("M", &optimal_exact), ("M^", &optimal_reconstructed)] {
        if got[..] != golden::OPTIMAL[..] {
            mismatches.push(format!(
                "optimal split of {name} is {}, expected {}",
                split_label(got),
                split_label(&golden::OPTIMAL)
            ));
        }
    }

    Ok(Report {
        accesses: seq.len(),
        exact,
        reconstructed,
        adjacency,
        splits: golden::SPLITS.iter().map(|s| s.to_vec()).collect(),
        cuts_exact,
        cuts_reconstructed,
        optimal_exact,
        optimal_reconstructed,
        mismatches,
    })
}

fn to_f64(m: &[Vec<i64>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect()
}

fn diff_matrix(name: &str, got: &[Vec<i64>], want: &[[i64; 4]; 4], out: &mut Vec<String>) {
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        for (j, (a, b)) in g.iter().zip(w).enumerate() {
            if a != b {
                out.push(format!("{name}[{i}][{j}] = {a}, expected {b}"));
            }
        }
    }
}

fn diff_cuts(name: &str, got: &[f64], want: &[f64], out: &mut Vec<String>) {
    for ((split, g), w) in golden::SPLITS.iter().zip(got).zip(want) {
        if g != w {
            out.push(format!(
                "{name} of {} = {g}, expected {w}",
                split_label(split)
            ));
        }
    }
}

/// `{0,2}|{1,3}` for a two-way assignment.
pub fn split_label(parts: &[usize]) -> String {
    let side = |p| {
        let ids: Vec<String> = parts
            .iter()
            .enumerate()
            .filter(|&(_, &x)| x == p)
            .map(|(v, _)| v.to_string())
            .collect();
        format!("{{{}}}", ids.join(","))
    };
    format!("{}|{}", side(0), side(1))
}

pub fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let matrix = |s: &mut String, title: &str, m: &[Vec<i64>]| {
        let _ = writeln!(s, "{title}");
        for row in m {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>3}")).collect();
            let _ = writeln!(s, "{}", cells.join(""));
        }
    };
    let _ = writeln!(s, "accesses: {}", r.accesses);
    matrix(&mut s, "M (exact transitions)", &r.exact);
    matrix(&mut s, "M^ (reconstructed, rounded)", &r.reconstructed);
    matrix(&mut s, "M + M^T", &r.adjacency);
    let _ = writeln!(s, "{:<14}{:>8}{:>8}", "split", "cut(M)", "cut(M^)");
    for ((split, a), b) in r
        .splits
        .iter()
        .zip(&r.cuts_exact)
        .zip(&r.cuts_reconstructed)
    {
        let _ = writeln!(s, "{:<14}{a:>8}{b:>8}", split_label(split));
    }
    let _ = writeln!(
        s,
        "optimal split: M {}, M^ {}",
        split_label(&r.optimal_exact),
        split_label(&r.optimal_reconstructed)
    );
    if r.mismatches.is_empty() {
        let _ = writeln!(s, "all values match");
    } else {
        let _ = writeln!(s, "first mismatch: {}", r.mismatches[0]);
        for m in &r.mismatches[1..] {
            let _ = writeln!(s, "mismatch: {m}");
        }
    }
    s
}
