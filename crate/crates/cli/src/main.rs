//! `dydap`: batch driver for the golden replay, DN-tree sweeps, the
//! partitioner and the cluster comparison. Every command writes CSV (or the
//! replay report) to `--out` when given, otherwise to stdout.

mod replay;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dydap_core::analysis::{
    fit_growth_exponent, log_checkpoints, solve_size_exponent, ExponentQuery,
};
use dydap_core::golden;
use dydap_core::partitioner::{evaluate, partition_exhaustive, partition_heuristic};
use dydap_core::simulator::ExperimentConfig;
use dydap_core::workload::{error_sweep, measure_growth, AccessSequence, RmatParams};
use dydap_core::{AccessGraph, ConstraintMatrix, PartitionSpec};

/// Log verbosity, e.g. `DYDAP_LOG=debug`.
const LOG_ENV: &str = "DYDAP_LOG";

/// Same default as the experiment config.
const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "dydap",
    version,
    about = "Workload-adaptive extent placement experiments"
)]
struct Cli {
    /// TOML experiment file (used by `compare`; every key is optional).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random stream; overrides the config file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Created if missing. Without it, results go to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay the 44-access reference sequence and check every derived value.
    /// Exits 1 on any mismatch.
    ReplayGolden {
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        /// Read the sequence from FILE (one extent id per line) instead.
        #[arg(long, value_name = "FILE")]
        sequence: Option<PathBuf>,
    },
    /// Compression error per (side, k) on shared R-MAT streams.
    ErrorSweep(ErrorSweepArgs),
    /// DN-tree node count against stream length, with the fitted exponent.
    SizeSweep(SizeSweepArgs),
    /// Solve the growth exponent for quadrant probabilities and growth factors.
    Exponent(ExponentArgs),
    /// Partition a weighted edge list under a uniform balance constraint.
    Partition(PartitionArgs),
    /// Run static and adaptive placement on the simulated cluster.
    Compare {
        /// Override the number of simulated nodes.
        #[arg(long)]
        nodes: Option<u32>,
    },
}

#[derive(Debug, Args)]
struct ErrorSweepArgs {
    /// Quadrant probabilities p0,p1,p2,p3.
    #[arg(long, value_delimiter = ',', default_values_t = [0.45, 0.25, 0.25, 0.05])]
    p: Vec<f64>,
    /// Matrix sides (powers of two).
    #[arg(long, value_delimiter = ',', default_values_t = [512u64])]
    sides: Vec<u64>,
    /// Threshold growth factors.
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 4.0, 8.0])]
    k: Vec<f64>,
    /// Accesses per stream (transitions + 1).
    #[arg(long, default_value_t = 100_000)]
    accesses: u64,
    /// Base threshold.
    #[arg(long, default_value_t = 16)]
    t: u64,
    /// Number of streams, seeded seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

#[derive(Debug, Args)]
struct SizeSweepArgs {
    /// Quadrant probabilities p0,p1,p2,p3.
    #[arg(long, value_delimiter = ',', default_values_t = [0.45, 0.25, 0.25, 0.05])]
    p: Vec<f64>,
    /// Threshold growth factor.
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Base threshold.
    #[arg(long, default_value_t = 16)]
    t: u64,
    /// Matrix side is 2^depth.
    #[arg(long, default_value_t = 24)]
    depth: u32,
    /// Largest stream length; checkpoints run from 100 in quarter decades.
    #[arg(long, default_value_t = 1_000_000)]
    max_accesses: u64,
}

#[derive(Debug, Args)]
struct ExponentArgs {
    /// Quadrant probabilities p0,p1,p2,p3; repeat for several rows.
    #[arg(long, value_name = "P0,P1,P2,P3")]
    p: Vec<String>,
    /// Threshold growth factors.
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 4.0, 8.0])]
    k: Vec<f64>,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    /// Edge list: optional `# vertices N` header, then `u v weight` lines.
    #[arg(long, value_name = "FILE")]
    graph: PathBuf,
    /// Number of parts.
    #[arg(long)]
    parts: usize,
    /// Allowed imbalance (max part share times parts).
    #[arg(long, default_value_t = dydap_core::partitioner::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Enumerate every assignment instead of the heuristic (small graphs only).
    #[arg(long)]
    exhaustive: bool,
}

/// Command ran but its result disagrees with the reference values.
#[derive(Debug)]
struct Mismatch;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Mismatch)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Result<(), Mismatch>> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let out = cli.out.as_deref();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    }
    match &cli.command {
        Command::ReplayGolden { json, sequence } => replay_golden(out, *json, sequence.as_deref()),
        Command::ErrorSweep(a) => cmd_error_sweep(out, a, seed).map(Ok),
        Command::SizeSweep(a) => cmd_size_sweep(out, a, seed).map(Ok),
        Command::Exponent(a) => cmd_exponent(out, a).map(Ok),
        Command::Partition(a) => cmd_partition(out, a, seed).map(Ok),
        Command::Compare { nodes } => cmd_compare(cli, *nodes).map(Ok),
    }
}

/// `dir/name` when an output directory is set, stdout otherwise.
fn sink(out: Option<&Path>, name: &str) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(dir) => {
            let path = dir.join(name);
            let f =
                File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn probabilities(p: &[f64]) -> Result<[f64; 4]> {
    p.try_into()
        .map_err(|_| anyhow::anyhow!("expected 4 probabilities, got {}", p.len()))
}

fn replay_golden(
    out: Option<&Path>,
    json: bool,
    sequence: Option<&Path>,
) -> Result<Result<(), Mismatch>> {
    let seq = match sequence {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            AccessSequence::read_from(BufReader::new(f))?
        }
        None => AccessSequence::new(golden::SEQUENCE.to_vec()),
    };
    let report = replay::run(&seq)?;
    let mut w = sink(out, if json { "golden.json" } else { "golden.txt" })?;
    if json {
        serde_json::to_writer(&mut w, &report)?;
        writeln!(w)?;
    } else {
        write!(w, "{}", replay::render_text(&report))?;
    }
    w.flush()?;
    if report.mismatches.is_empty() {
        Ok(Ok(()))
    } else {
        if out.is_some() {
            eprintln!("first mismatch: {}", report.mismatches[0]);
        }
        Ok(Err(Mismatch))
    }
}

fn cmd_error_sweep(out: Option<&Path>, a: &ErrorSweepArgs, seed: u64) -> Result<()> {
    let p = probabilities(&a.p)?;
    let mut w = sink(out, "error_sweep.csv")?;
    writeln!(w, "side,k,seed,t,error")?;
    for &side in &a.sides {
        if !side.is_power_of_two() {
            bail!("side {side} is not a power of two");
        }
        let depth = side.trailing_zeros();
        for s in seed..seed + a.seeds {
            let params = RmatParams::new(p, depth, s)?;
            let reports = error_sweep(&params, &a.k, a.t, a.accesses)?;
            for (k, r) in a.k.iter().zip(reports) {
                writeln!(w, "{side},{k},{s},{},{}", a.t, r.error)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_size_sweep(out: Option<&Path>, a: &SizeSweepArgs, seed: u64) -> Result<()> {
    let p = probabilities(&a.p)?;
    if a.max_accesses < 10_000 {
        bail!("max-accesses must be at least 10000 to span two decades");
    }
    let params = RmatParams::new(p, a.depth, seed)?;
    let sample = measure_growth(&params, a.k, a.t, &log_checkpoints(a.max_accesses))?;
    let fitted = fit_growth_exponent(&sample)?;
    let solved = solve_size_exponent(&ExponentQuery::new(p, a.k)?);

    let mut w = sink(out, "size_sweep.csv")?;
    writeln!(w, "n,node_count")?;
    for (n, nodes) in &sample.points {
        writeln!(w, "{n},{nodes}")?;
    }
    w.flush()?;
    let summary = format!(
        "p0,p1,p2,p3,k,t,fitted,solver\n{},{},{},{},{},{},{fitted},{solved}\n",
        p[0], p[1], p[2], p[3], a.k, a.t
    );
    match out {
        Some(_) => {
            let mut f = sink(out, "size_fit.csv")?;
            f.write_all(summary.as_bytes())?;
            f.flush()?;
        }
        None => eprint!("{summary}"),
    }
    Ok(())
}

fn cmd_exponent(out: Option<&Path>, a: &ExponentArgs) -> Result<()> {
    let rows: Vec<[f64; 4]> = if a.p.is_empty() {
        vec![[0.25; 4], [0.45, 0.25, 0.25, 0.05]]
    } else {
        a.p.iter()
            .map(|s| {
                let v: Vec<f64> = s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .with_context(|| format!("bad probability list {s:?}"))?;
                probabilities(&v)
            })
            .collect::<Result<_>>()?
    };
    let mut w = sink(out, "exponent.csv")?;
    writeln!(w, "p0,p1,p2,p3,k,s")?;
    for p in rows {
        for &k in &a.k {
            let s = solve_size_exponent(&ExponentQuery::new(p, k)?);
            writeln!(w, "{},{},{},{},{k},{s}", p[0], p[1], p[2], p[3])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_partition(out: Option<&Path>, a: &PartitionArgs, seed: u64) -> Result<()> {
    let f = File::open(&a.graph).with_context(|| format!("cannot open {}", a.graph.display()))?;
    let g = AccessGraph::read_edge_list(BufReader::new(f))?;
    let c = ConstraintMatrix::uniform(g.num_vertices());
    let spec = PartitionSpec::new(a.parts, vec![a.tolerance])?;
    let p = if a.exhaustive {
        partition_exhaustive(&g, &c, &spec)?
    } else {
        partition_heuristic(&g, &c, &spec, seed)?
    };
    let m = evaluate(&g, &c, &p)?;
    let mut w = sink(out, "partition.csv")?;
    p.write_csv(&mut w)?;
    w.flush()?;
    let metrics = format!("edge_cut,imbalance\n{},{}\n", m.edge_cut, m.imbalance[0]);
    match out {
        Some(_) => print!("{metrics}"),
        None => eprint!("{metrics}"),
    }
    Ok(())
}

fn cmd_compare(cli: &Cli, nodes: Option<u32>) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("cannot load {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = nodes {
        config.nodes = n;
    }
    let cmp = config.run()?;
    for (i, cycle) in cmp.cycles.iter().enumerate() {
        log::info!("cycle {i}: {cycle:?}");
    }
    match cli.out.as_deref() {
        Some(dir) => cmp.write_csv(dir)?,
        None => {
            let mut w = sink(None, "")?;
            cmp.write_metrics_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_labels() {
        assert_eq!(replay::split_label(&golden::OPTIMAL), "{0,2}|{1,3}");
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
