//! Per-update timing of `out = always[0:k] (a+b > -2)` for growing `k`.
//!
//! Results are reported, never asserted; callers decide what is acceptable.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discrete::DiscreteMonitor;
use crate::monitor::MonitorError;
use crate::parser::{parse_spec, SpecError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// Samples uniform in `[-5, 5]`.
    Uniform,
    /// Strictly increasing samples: every value stays in the min-window.
    Increasing,
}

impl Pattern {
    pub fn parse(s: &str) -> Option<Pattern> {
        match s {
            "uniform" => Some(Pattern::Uniform),
            "increasing" => Some(Pattern::Increasing),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub k: u64,
    /// Timed updates, after the discarded warm-up.
    pub n_updates: usize,
    pub warmup: u64,
    /// Per-update wall time in seconds.
    pub mean: f64,
    pub median: f64,
    pub p99: f64,
    pub max_wedge_len: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

/// The window bounds of the timing table.
pub const DEFAULT_KS: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

pub fn bench_spec(k: u64) -> String {
    format!("out = always[0:{k}] (a+b > -2)\n")
}

/// Runs the warm-up, then times `samples` single updates per `k`.
pub fn run_bench(ks: &[u64], samples: usize, seed: u64, pattern: Pattern) -> Result<Vec<BenchResult>, BenchError> {
    ks.iter().map(|&k| bench_one(k, samples, seed, pattern)).collect()
}

fn bench_one(k: u64, samples: usize, seed: u64, pattern: Pattern) -> Result<BenchResult, BenchError> {
    let mut mon = DiscreteMonitor::new(&parse_spec(&bench_spec(k))?)?;
    let warmup = mon.warmup().max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |t: u64| match pattern {
        Pattern::Uniform => (rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0)),
        Pattern::Increasing => (t as f64 * 1e-6, 0.0),
    };
    for t in 0..warmup {
        let (a, b) = sample(t);
        mon.update(t, [("a", a), ("b", b)])?;
    }
    let mut times = Vec::with_capacity(samples);
    for t in warmup..warmup + samples as u64 {
        let (a, b) = sample(t);
        let start = Instant::now();
        let out = mon.update(t, [("a", a), ("b", b)])?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    let mean = times.iter().sum::<f64>() / times.len().max(1) as f64;
    times.sort_by(f64::total_cmp);
    let quantile = |q: f64| times.get(((times.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0.0);
    Ok(BenchResult {
        k,
        n_updates: samples,
        warmup,
        mean,
        median: quantile(0.5),
        p99: quantile(0.99),
        max_wedge_len: mon.max_wedge_len(),
    })
}

/// Plain-text table, one row per `k`.
pub fn format_table(results: &[BenchResult]) -> String {
    let mut s = format!(
        "{:>9} {:>9} {:>12} {:>12} {:>12} {:>9}\n",
        "k", "updates", "mean (s)", "median (s)", "p99 (s)", "wedge"
    );
    for r in results {
        s += &format!(
            "{:>9} {:>9} {:>12.3e} {:>12.3e} {:>12.3e} {:>9}\n",
            r.k, r.n_updates, r.mean, r.median, r.p99, r.max_wedge_len
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_reports_positive_times() {
        let r = run_bench(&[100], 200, 7, Pattern::Uniform).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].k, r[0].n_updates, r[0].warmup), (100, 200, 100));
        assert!(r[0].mean > 0.0 && r[0].median <= r[0].p99);
        assert!(r[0].max_wedge_len <= 101);
    }

    #[test]
    fn increasing_inputs_saturate_the_wedge() {
        let r = run_bench(&[50], 100, 7, Pattern::Increasing).unwrap();
        assert!((50..=51).contains(&r[0].max_wedge_len), "{}", r[0].max_wedge_len);
    }

    #[test]
    fn table_has_one_row_per_k() {
        let r = run_bench(&[10, 20], 10, 1, Pattern::Uniform).unwrap();
        assert_eq!(format_table(&r).lines().count(), 3);
    }
}
