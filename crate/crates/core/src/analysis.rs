//! Growth exponent of DN-tree size.
//!
//! Under an R-MAT access model with quadrant probabilities `p_i` and
//! threshold growth factor `k`, a DN-tree holding `N` transitions has
//! `Theta(N^s)` nodes, where `s` solves `sum_i p_i^s = k^s`. The left side is
//! strictly decreasing in `s` and the right side nondecreasing, so the root
//! is unique and is found by bisection. Uniform `p` maximizes `s`, giving the
//! bound `log 4 / log 4k`.

use thiserror::Error;

use crate::workload::validate_probabilities;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("invalid probabilities {0:?}")]
    InvalidProbabilities([f64; 4]),
    #[error("growth factor must be >= 1, got {0}")]
    InvalidGrowthFactor(f64),
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample sizes must be strictly increasing and positive")]
    NotIncreasing,
    #[error("samples span {0:.2} decades of N, need at least 2")]
    NarrowSpan(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentQuery {
    pub p: [f64; 4],
    pub growth_factor: f64,
}

impl ExponentQuery {
    pub fn new(p: [f64; 4], growth_factor: f64) -> Result<Self, AnalysisError> {
        validate_probabilities(&p).map_err(|_| AnalysisError::InvalidProbabilities(p))?;
        if !growth_factor.is_finite() || growth_factor < 1.0 {
            return Err(AnalysisError::InvalidGrowthFactor(growth_factor));
        }
        Ok(Self { p, growth_factor })
    }

    pub fn uniform(growth_factor: f64) -> Result<Self, AnalysisError> {
        Self::new([0.25; 4], growth_factor)
    }

    fn residual(&self, s: f64) -> f64 {
        self.p.iter().map(|p| p.powf(s)).sum::<f64>() - self.growth_factor.powf(s)
    }
}

const BRACKET: (f64, f64) = (1e-9, 2.0);

/// Root of `sum p_i^s - k^s` in `(0, 2]`.
pub fn solve_size_exponent(q: &ExponentQuery) -> f64 {
    let (mut lo, mut hi) = BRACKET;
    // residual(lo) > 0 >= residual(hi) for every valid query
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = q.residual(mid);
        if r.abs() < 1e-12 || hi - lo < 1e-15 {
            return mid;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `log 4 / log 4k`: the exponent for uniform `p`, an upper bound for any `p`.
pub fn uniform_bound(growth_factor: f64) -> f64 {
    4f64.ln() / (4.0 * growth_factor).ln()
}

/// Measured `(N, node_count)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowthSample {
    pub points: Vec<(u64, u64)>,
}

impl GrowthSample {
    pub fn new(points: Vec<(u64, u64)>) -> Self {
        Self { points }
    }
}

/// Least-squares slope of `ln node_count` against `ln N`.
pub fn fit_growth_exponent(samples: &GrowthSample) -> Result<f64, AnalysisError> {
    let pts = &samples.points;
    if pts.len() < 3 {
        return Err(AnalysisError::TooFewSamples(pts.len()));
    }
    if pts[0].0 == 0 || pts.windows(2).any(|w| w[1].0 <= w[0].0) || pts.iter().any(|p| p.1 == 0) {
        return Err(AnalysisError::NotIncreasing);
    }
    let span = (pts[pts.len() - 1].0 as f64 / pts[0].0 as f64).log10();
    if span < 2.0 - 1e-9 {
        return Err(AnalysisError::NarrowSpan(span));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| (p.1 as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Stream lengths from 100 up to `max`, four per decade, always ending at
/// `max`.
pub fn log_checkpoints(max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for i in 8.. {
        let n = 10f64.powf(i as f64 / 4.0).round() as u64;
        if n >= max {
            break;
        }
        out.push(n);
    }
    out.push(max);
    out
}
