//! Reproducible parallel Monte Carlo.
//!
//! Path `i` always draws its randomness from `derive_seed(master, i)`, and
//! per-path results are reduced sequentially in path-index order, so the
//! output is bit-identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SEMICHAN_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McJob {
    pub n_paths: usize,
    pub seed: u64,
    /// `None` uses `SEMICHAN_WORKERS`, falling back to all cores.
    pub workers: Option<usize>,
    /// Report progress on standard error.
    pub progress: bool,
}

impl McJob {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            workers: None,
            progress: false,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers.max(1));
        self
    }

    pub fn with_progress(mut self, on: bool) -> Self {
        self.progress = on;
        self
    }

    fn worker_count(&self) -> usize {
        self.workers
            .or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok())
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

/// Which estimator a Monte Carlo value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Integrated causal estimation loss.
    Loss,
    /// Log-likelihood ratio (information density or its relative version).
    Density,
    /// Any other per-path statistic.
    Custom,
}

/// A Monte Carlo estimate in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoEstimate {
    pub value: f64,
    /// Sample standard deviation over `√n_paths`; NaN (serialized as null)
    /// when `n_paths < 2`.
    pub std_error: f64,
    pub n_paths: usize,
    pub route: Route,
    pub seed: u64,
    pub scenario_fingerprint: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Streaming mean/variance with pairwise merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamStats {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for StreamStats {
    fn default() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl StreamStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&self, other: &StreamStats) -> StreamStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / n as f64;
        StreamStats {
            count: n,
            mean,
            m2,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::default();
        xs.iter().for_each(|&x| s.push(x));
        s
    }
}

/// Per-path statistic values, path-major, in path-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSamples {
    seed: u64,
    width: usize,
    values: Vec<f64>,
}

impl PathSamples {
    pub fn n_paths(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.values.len() / self.width
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.width).copied().collect()
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    /// Estimate from the first `prefix` paths of column `c`.
    pub fn estimate_prefix(&self, c: usize, prefix: usize, route: Route, fingerprint: &str) -> InfoEstimate {
        let col = self.column(c);
        let stats = StreamStats::from_slice(&col[..prefix.min(col.len())]);
        let mut warnings = Vec::new();
        if stats.count < 2 {
            warnings.push("fewer than two paths: standard error undefined".to_string());
        }
        InfoEstimate {
            value: if stats.count == 0 { f64::NAN } else { stats.mean },
            std_error: stats.std_error(),
            n_paths: stats.count as usize,
            route,
            seed: self.seed,
            scenario_fingerprint: fingerprint.to_string(),
            warnings,
        }
    }

    pub fn estimate(&self, c: usize, route: Route, fingerprint: &str) -> InfoEstimate {
        self.estimate_prefix(c, self.n_paths(), route, fingerprint)
    }
}

/// Evaluates `stat(path_index, path_seed)` for every path; each call must
/// return exactly `width` values.
pub fn run_paths<F>(job: &McJob, width: usize, stat: F) -> Result<PathSamples>
where
    F: Fn(u64, u64) -> Result<Vec<f64>> + Sync,
{
    if job.n_paths == 0 {
        return Err(Error::validation("n_paths", "need at least one path"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.worker_count())
        .build()
        .map_err(|e| Error::validation("workers", e.to_string()))?;
    let done = AtomicUsize::new(0);
    let started = Instant::now();
    let n = job.n_paths;
    let tick = (n / 20).max(1);

    let results: Vec<Result<Vec<f64>>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let path_seed = derive_seed(job.seed, i as u64);
                let r = stat(i as u64, path_seed).and_then(|v| {
                    if v.len() == width {
                        Ok(v)
                    } else {
                        Err(Error::validation("statistic", format!("expected {width} values, got {}", v.len())))
                    }
                });
                if job.progress {
                    let c = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if c % tick == 0 || c == n {
                        let el = started.elapsed().as_secs_f64();
                        let eta = el / c as f64 * (n - c) as f64;
                        eprintln!("paths {c}/{n}  elapsed {el:.1}s  eta {eta:.1}s");
                    }
                }
                r.map_err(|e| Error::Path {
                    path: i as u64,
                    seed: path_seed,
                    source: Box::new(e),
                })
            })
            .collect()
    });

    let mut values = Vec::with_capacity(n * width);
    for r in results {
        values.extend(r?);
    }
    Ok(PathSamples {
        seed: job.seed,
        width,
        values,
    })
}

/// Single-statistic Monte Carlo run.
pub fn run_mc<F>(job: &McJob, route: Route, fingerprint: &str, stat: F) -> Result<InfoEstimate>
where
    F: Fn(u64, u64) -> Result<f64> + Sync,
{
    let samples = run_paths(job, 1, |i, s| stat(i, s).map(|v| vec![v]))?;
    Ok(samples.estimate(0, route, fingerprint))
}

/// Estimates from path prefixes; each checkpoint reuses the same paths.
pub fn convergence_sweep<F>(
    job: &McJob,
    checkpoints: &[usize],
    route: Route,
    fingerprint: &str,
    stat: F,
) -> Result<Vec<InfoEstimate>>
where
    F: Fn(u64, u64) -> Result<f64> + Sync,
{
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("checkpoints", "must be strictly ascending"));
    }
    if checkpoints.iter().any(|&c| c == 0 || c > job.n_paths) {
        return Err(Error::validation("checkpoints", "must lie in 1..=n_paths"));
    }
    let samples = run_paths(job, 1, |i, s| stat(i, s).map(|v| vec![v]))?;
    Ok(checkpoints
        .iter()
        .map(|&c| samples.estimate_prefix(0, c, route, fingerprint))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian_stat(_: u64, seed: u64) -> Result<f64> {
        let mut r = crate::rng::stream_rng(seed, crate::rng::Stream::Brownian);
        Ok(crate::rng::standard_normal(&mut r))
    }

    #[test]
    fn constant_statistic() {
        let est = run_mc(&McJob::new(50, 1), Route::Custom, "x", |_, _| Ok(2.5)).unwrap();
        assert_eq!(est.value, 2.5);
        assert_eq!(est.std_error, 0.0);
        assert!(est.warnings.is_empty());
    }

    #[test]
    fn single_path_flags_undefined_error() {
        let est = run_mc(&McJob::new(1, 1), Route::Custom, "x", |_, _| Ok(1.0)).unwrap();
        assert!(est.std_error.is_nan());
        assert_eq!(est.warnings.len(), 1);
        let json = serde_json::to_string(&est).unwrap();
        assert!(json.contains("\"std_error\":null"), "{json}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let job = McJob::new(3000, 77);
        let base = run_mc(&job.with_workers(1), Route::Custom, "x", gaussian_stat).unwrap();
        for w in [2, 3, 8] {
            let e = run_mc(&job.with_workers(w), Route::Custom, "x", gaussian_stat).unwrap();
            assert_eq!(serde_json::to_string(&e).unwrap(), serde_json::to_string(&base).unwrap());
        }
    }

    #[test]
    fn sweep_uses_prefixes() {
        let job = McJob::new(400, 5);
        let full = run_mc(&job, Route::Custom, "x", gaussian_stat).unwrap();
        let sweep = convergence_sweep(&job, &[100, 400], Route::Custom, "x", gaussian_stat).unwrap();
        assert_eq!(sweep[1], full);
        let first: Vec<f64> = (0..100).map(|i| gaussian_stat(i, derive_seed(5, i)).unwrap()).collect();
        let s = StreamStats::from_slice(&first);
        assert_eq!(sweep[0].value, s.mean);
        assert_eq!(sweep[0].n_paths, 100);
        assert!(convergence_sweep(&job, &[400, 100], Route::Custom, "x", gaussian_stat).is_err());
        assert!(convergence_sweep(&job, &[500], Route::Custom, "x", gaussian_stat).is_err());
    }

    #[test]
    fn path_failures_carry_index_and_seed() {
        let err = run_mc(&McJob::new(100, 3).with_workers(4), Route::Custom, "x", |i, _| {
            if i == 37 || i == 80 {
                Err(Error::Domain("boom".into()))
            } else {
                Ok(0.0)
            }
        })
        .unwrap_err();
        match err {
            Error::Path { path, seed, .. } => {
                assert_eq!(path, 37);
                assert_eq!(seed, derive_seed(3, 37));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn seeds_shift_estimates_within_noise() {
        let a = run_mc(&McJob::new(20_000, 1), Route::Custom, "x", gaussian_stat).unwrap();
        let b = run_mc(&McJob::new(20_000, 2), Route::Custom, "x", gaussian_stat).unwrap();
        assert_ne!(a.value, b.value);
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.value - b.value).abs() <= 3.0 * se);
    }

    proptest! {
        #[test]
        fn merge_matches_sequential(xs in prop::collection::vec(-1e3f64..1e3, 1..80), split in 0usize..80) {
            let split = split.min(xs.len());
            let all = StreamStats::from_slice(&xs);
            let merged = StreamStats::from_slice(&xs[..split]).merge(&StreamStats::from_slice(&xs[split..]));
            prop_assert_eq!(all.count, merged.count);
            prop_assert!((all.mean - merged.mean).abs() <= 1e-9 * (1.0 + all.mean.abs()));
            prop_assert!((all.m2 - merged.m2).abs() <= 1e-7 * (1.0 + all.m2.abs()));
            prop_assert_eq!(all.min, merged.min);
            prop_assert_eq!(all.max, merged.max);
        }

        #[test]
        fn merge_is_associative(a in prop::collection::vec(-10f64..10.0, 0..20),
                                b in prop::collection::vec(-10f64..10.0, 0..20),
                                c in prop::collection::vec(-10f64..10.0, 0..20)) {
            let (sa, sb, sc) = (StreamStats::from_slice(&a), StreamStats::from_slice(&b), StreamStats::from_slice(&c));
            let left = sa.merge(&sb).merge(&sc);
            let right = sa.merge(&sb.merge(&sc));
            prop_assert_eq!(left.count, right.count);
            prop_assert!((left.mean - right.mean).abs() <= 1e-12 * (1.0 + left.mean.abs()));
            prop_assert!((left.m2 - right.m2).abs() <= 1e-9 * (1.0 + left.m2.abs()));
        }
    }
}
