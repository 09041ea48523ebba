//! Forward simulation of the channel output under one message value.
//!
//! Each step evaluates the encoding on the history strictly before `t_k`,
//! then draws the Brownian increment and per-atom Poisson counts for
//! `[t_k, t_{k+1})`. The output is
//!
//! ```text
//! Y(t_k) = Σ_{i<k} ΔYc_i + Σ_{i<k} Σ_j z_j N_{i,j} + γ·c0·t_k
//! ```
//!
//! where `ΔYc_i = √γ β_i dt + ΔW_i` is the continuous residual and `γ·c0·t`
//! compensates the small jumps.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Encoding, EncodingSpec, History, Message, ScenarioConfig, TimeGrid};
use crate::rng::{self, Stream};

/// One simulated realization, including the hidden truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub grid: TimeGrid,
    pub alpha_index: usize,
    /// The drawn message value for a Gaussian message; `None` for finite sets.
    pub message_value: Option<f64>,
    pub cont_increments: Vec<f64>,
    /// Step-major, `steps × atoms`.
    pub jump_counts: Vec<u32>,
    pub truth_beta: Vec<f64>,
    /// Step-major, `steps × atoms`.
    pub truth_lambda: Vec<f64>,
    pub seed: u64,
    pub jump_sizes: Vec<f64>,
    /// `γ·c0`, the deterministic drift compensating small jumps.
    pub drift_offset: f64,
}

impl PathRecord {
    pub fn n_atoms(&self) -> usize {
        self.jump_sizes.len()
    }

    pub fn counts(&self, k: usize) -> &[u32] {
        let j = self.n_atoms();
        &self.jump_counts[k * j..(k + 1) * j]
    }

    pub fn lambdas(&self, k: usize) -> &[f64] {
        let j = self.n_atoms();
        &self.truth_lambda[k * j..(k + 1) * j]
    }

    /// `Y(t_k)` for `k = 0..=steps`.
    pub fn y_series(&self) -> Vec<f64> {
        y_series(
            &self.grid,
            &self.cont_increments,
            &self.jump_counts,
            &self.jump_sizes,
            self.drift_offset,
        )
    }
}

/// What a receiver sees: the output increments, never the hidden truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservablePath {
    grid: TimeGrid,
    cont_increments: Vec<f64>,
    jump_counts: Vec<u32>,
    seed: u64,
    jump_sizes: Vec<f64>,
    drift_offset: f64,
}

impl ObservablePath {
    /// Builds an observation record directly, e.g. for recorded data.
    pub fn from_parts(
        scenario: &ScenarioConfig,
        cont_increments: Vec<f64>,
        jump_counts: Vec<u32>,
        seed: u64,
    ) -> Result<Self> {
        let grid = *scenario.grid();
        let j = scenario.levy().len();
        if cont_increments.len() != grid.steps() || jump_counts.len() != grid.steps() * j {
            return Err(Error::validation(
                "observations",
                "increment arrays do not match the grid and measure",
            ));
        }
        Ok(Self {
            grid,
            cont_increments,
            jump_counts,
            seed,
            jump_sizes: scenario.levy().sizes(),
            drift_offset: scenario.snr() * scenario.levy().small_jump_drift(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn cont_increments(&self) -> &[f64] {
        &self.cont_increments
    }

    pub fn jump_counts(&self) -> &[u32] {
        &self.jump_counts
    }

    pub fn counts(&self, k: usize) -> &[u32] {
        let j = self.jump_sizes.len();
        &self.jump_counts[k * j..(k + 1) * j]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jump_sizes
    }

    pub fn n_atoms(&self) -> usize {
        self.jump_sizes.len()
    }

    pub fn drift_offset(&self) -> f64 {
        self.drift_offset
    }

    pub fn y_series(&self) -> Vec<f64> {
        y_series(
            &self.grid,
            &self.cont_increments,
            &self.jump_counts,
            &self.jump_sizes,
            self.drift_offset,
        )
    }

    /// Checks that this record can be filtered by `scenario`.
    pub fn check_against(&self, scenario: &ScenarioConfig) -> Result<()> {
        if self.grid != *scenario.grid() {
            return Err(Error::validation("grid", "observation grid differs from the model grid"));
        }
        if self.jump_sizes != scenario.levy().sizes() {
            return Err(Error::validation("levy", "observation atoms differ from the model measure"));
        }
        Ok(())
    }
}

pub fn project_observable(path: &PathRecord) -> ObservablePath {
    ObservablePath {
        grid: path.grid,
        cont_increments: path.cont_increments.clone(),
        jump_counts: path.jump_counts.clone(),
        seed: path.seed,
        jump_sizes: path.jump_sizes.clone(),
        drift_offset: path.drift_offset,
    }
}

/// Running value of `Y(t_k)`. Shared by the simulator, the filters and the
/// path dumps so every consumer sees bit-identical output values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OutputAccumulator {
    cont: f64,
    jumps: f64,
    offset: f64,
}

impl OutputAccumulator {
    pub(crate) fn new(drift_offset: f64) -> Self {
        Self {
            cont: 0.0,
            jumps: 0.0,
            offset: drift_offset,
        }
    }

    pub(crate) fn advance(&mut self, dyc: f64, counts: &[u32], sizes: &[f64]) {
        self.cont += dyc;
        for (&n, &z) in counts.iter().zip(sizes) {
            if n > 0 {
                self.jumps += z * n as f64;
            }
        }
    }

    pub(crate) fn value(&self, grid: &TimeGrid, k: usize) -> f64 {
        self.cont + self.jumps + self.offset * grid.node(k)
    }

    /// Sum of the continuous residuals so far.
    pub(crate) fn continuous(&self) -> f64 {
        self.cont
    }
}

fn y_series(
    grid: &TimeGrid,
    cont: &[f64],
    counts: &[u32],
    sizes: &[f64],
    offset: f64,
) -> Vec<f64> {
    let j = sizes.len();
    let mut acc = OutputAccumulator::new(offset);
    let mut out = Vec::with_capacity(cont.len() + 1);
    out.push(acc.value(grid, 0));
    for k in 0..cont.len() {
        acc.advance(cont[k], &counts[k * j..(k + 1) * j], sizes);
        out.push(acc.value(grid, k + 1));
    }
    out
}

/// Evaluates one encoding at a history, writing the intensity multipliers
/// into `lambdas` and returning the drift.
pub(crate) fn evaluate_encoding(
    encoding: &dyn Encoding,
    history: &History<'_>,
    scenario: &ScenarioConfig,
    lambdas: &mut [f64],
) -> Result<f64> {
    let beta = encoding.drift(history);
    if !beta.is_finite() {
        return Err(Error::Domain(format!(
            "encoding returned non-finite drift at step {}",
            history.step()
        )));
    }
    for (j, (slot, atom)) in lambdas.iter_mut().zip(scenario.levy().atoms()).enumerate() {
        let l = encoding.jump_scale(history, j, atom.size);
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::Domain(format!(
                "encoding returned intensity {l} at step {}, atom {j}",
                history.step()
            )));
        }
        if scenario.strict_positivity() && l < scenario.lambda_floor() {
            return Err(Error::Domain(format!(
                "intensity {l} at step {}, atom {j} is below the positivity floor {}",
                history.step(),
                scenario.lambda_floor()
            )));
        }
        *slot = l;
    }
    Ok(beta)
}

/// Draws the message index from the prior using the path's message stream.
pub fn sample_message(scenario: &ScenarioConfig, path_seed: u64) -> usize {
    match scenario.message() {
        Message::Finite(set) => {
            let mut rng = rng::stream_rng(path_seed, Stream::Message);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut last_positive = 0;
            for (i, h) in set.iter().enumerate() {
                if h.prior > 0.0 {
                    last_positive = i;
                }
                acc += h.prior;
                if u < acc && h.prior > 0.0 {
                    return i;
                }
            }
            last_positive
        }
        Message::Gaussian { .. } => 0,
    }
}

/// Simulates one path under hypothesis `alpha_index` (ignored, and must be 0,
/// for a Gaussian message, whose value is drawn from the seed).
pub fn simulate_path(scenario: &ScenarioConfig, alpha_index: usize, seed: u64) -> Result<PathRecord> {
    let (encoding, message_value): (Box<dyn Encoding>, Option<f64>) = match scenario.message() {
        Message::Finite(set) => {
            let h = set.get(alpha_index).ok_or_else(|| {
                Error::validation(
                    "alpha_index",
                    format!("index {alpha_index} outside {} hypotheses", set.len()),
                )
            })?;
            (Box::new(SharedEncoding(h.encoding.clone())), None)
        }
        Message::Gaussian { prior_var } => {
            if alpha_index != 0 {
                return Err(Error::validation(
                    "alpha_index",
                    "a Gaussian message has a single index 0",
                ));
            }
            let mut rng = rng::stream_rng(seed, Stream::Message);
            let x = prior_var.sqrt() * rng::standard_normal(&mut rng);
            (Box::new(EncodingSpec::constant(x, vec![])), Some(x))
        }
    };

    let grid = *scenario.grid();
    let n = grid.steps();
    let atoms = scenario.levy().atoms();
    let n_atoms = atoms.len();
    let g = scenario.snr();
    let sqrt_g = g.sqrt();
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let sizes = scenario.levy().sizes();
    let drift_offset = g * scenario.levy().small_jump_drift();

    let mut brownian = rng::stream_rng(seed, Stream::Brownian);
    let mut jump_rngs: Vec<_> = (0..n_atoms)
        .map(|j| rng::stream_rng(seed, Stream::Jumps(j)))
        .collect();

    let mut cont = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n * n_atoms);
    let mut truth_beta = Vec::with_capacity(n);
    let mut truth_lambda = Vec::with_capacity(n * n_atoms);
    let mut lambdas = vec![0.0; n_atoms];
    let mut acc = OutputAccumulator::new(drift_offset);

    for k in 0..n {
        let history = History::new(k, grid.node(k), acc.value(&grid, k), &cont, &counts, n_atoms);
        let beta = evaluate_encoding(encoding.as_ref(), &history, scenario, &mut lambdas)?;

        let dyc = sqrt_g * beta * dt + sqrt_dt * rng::standard_normal(&mut brownian);
        let step_start = counts.len();
        for (j, atom) in atoms.iter().enumerate() {
            let mean = g * lambdas[j] * atom.rate * dt;
            if mean > scenario.max_expected_jumps() {
                return Err(Error::Refinement {
                    step: k,
                    atom: j,
                    expected: mean,
                    threshold: scenario.max_expected_jumps(),
                });
            }
            counts.push(rng::poisson(&mut jump_rngs[j], mean));
        }
        acc.advance(dyc, &counts[step_start..], &sizes);
        cont.push(dyc);
        truth_beta.push(beta);
        truth_lambda.extend_from_slice(&lambdas);
    }

    Ok(PathRecord {
        grid,
        alpha_index,
        message_value,
        cont_increments: cont,
        jump_counts: counts,
        truth_beta,
        truth_lambda,
        seed,
        jump_sizes: sizes,
        drift_offset,
    })
}

/// Draws the message from the prior, then simulates.
pub fn simulate_from_prior(scenario: &ScenarioConfig, seed: u64) -> Result<PathRecord> {
    simulate_path(scenario, sample_message(scenario, seed), seed)
}

#[derive(Debug)]
struct SharedEncoding(std::sync::Arc<dyn Encoding>);

impl Encoding for SharedEncoding {
    fn drift(&self, h: &History<'_>) -> f64 {
        self.0.drift(h)
    }

    fn jump_scale(&self, h: &History<'_>, atom: usize, size: f64) -> f64 {
        self.0.jump_scale(h, atom, size)
    }
}

/// Outcome of the empirical bounded-energy check.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Largest observed `Σ β² dt + Σ (1 − √λ)² ν dt` over all sampled paths.
    pub bound: f64,
    /// `(min, max)` of the functional per hypothesis.
    pub per_hypothesis: Vec<(f64, f64)>,
    pub warning: Option<String>,
}

/// The discretized bounded-energy functional of one path.
pub fn energy_functional(path: &PathRecord, rates: &[f64]) -> f64 {
    let dt = path.grid.dt();
    let mut total = 0.0;
    for k in 0..path.grid.steps() {
        total += path.truth_beta[k] * path.truth_beta[k] * dt;
        for (l, nu) in path.lambdas(k).iter().zip(rates) {
            let d = 1.0 - l.sqrt();
            total += d * d * nu * dt;
        }
    }
    total
}

/// Samples `sample_paths` paths per hypothesis and reports the largest value
/// of the bounded-energy functional. A warning is attached when, within one
/// hypothesis, values spread by more than a factor of ten, which suggests the
/// functional is not bounded.
pub fn validate_assumptions(
    scenario: &ScenarioConfig,
    sample_paths: usize,
    seed: u64,
) -> Result<AssumptionReport> {
    let rates = scenario.levy().rates();
    let groups = scenario.message_count().max(1);
    let mut per_hypothesis = Vec::with_capacity(groups);
    let mut bound = 0.0f64;
    let mut warning = None;
    for i in 0..groups {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in 0..sample_paths {
            let path_seed = rng::derive_seed(seed, (i * sample_paths + p) as u64);
            let path = simulate_path(scenario, i, path_seed)?;
            let v = energy_functional(&path, &rates);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if sample_paths == 0 {
            lo = 0.0;
            hi = 0.0;
        }
        bound = bound.max(hi);
        if hi > 10.0 * lo && hi > 1e-12 && warning.is_none() {
            warning = Some(format!(
                "hypothesis {i}: energy functional ranges over [{lo:.4e}, {hi:.4e}]; \
                 it may not be bounded"
            ));
        }
        per_hypothesis.push((lo, hi));
    }
    Ok(AssumptionReport {
        bound,
        per_hypothesis,
        warning,
    })
}
