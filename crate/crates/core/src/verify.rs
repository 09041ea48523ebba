//! The acceptance suite: each criterion runs a pinned experiment and
//! compares it with an oracle or with the other estimator route.
//!
//! Sizes, seeds and tolerances are fixed here so that a run is reproducible
//! bit for bit. Oracle values come from `fixtures/oracles.json`, computed
//! independently of this crate; a different fixture file can be supplied to
//! check that a wrong reference value makes the suite fail.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{project_observable, simulate_from_prior, simulate_path};
use crate::doob_meyer::{decompose_density, decompose_relative};
use crate::error::{Error, Result};
use crate::filter::{filter_scenario, mismatched_filter_pair};
use crate::info::{estimate_kl_with, estimate_mi_with, mi_path_values, RouteChoice, RouteEstimates};
use crate::io::scenario_fingerprint;
use crate::mc::{convergence_sweep, run_paths, McJob, Route, StreamStats};
use crate::model::{EncodingSpec, Hypothesis, ScenarioConfig};
use crate::scenarios::{
    bpsk_awgn_mi, default_mismatch_pair, gaussian_mi_closed_form, gaussian_mi_quadrature, poisson_count_mi,
    preset_bpsk_gaussian, preset_by_name, preset_gaussian_conjugate, preset_jump_diffusion_feedback,
    preset_mismatch_pair, preset_poisson_binary, ScenarioPreset, PRESET_NAMES,
};

const DEFAULT_FIXTURES: &str = include_str!("../fixtures/oracles.json");

/// Reference values, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixtures {
    /// `½ ln 2`: Gaussian message, γ = T = σ² = 1.
    pub gaussian_conjugate_mi: f64,
    /// Equiprobable ±1 drift, γT = 1.
    pub bpsk_gaussian_mi: f64,
    /// Equiprobable Poisson means 1 and 2.
    pub poisson_binary_mi: f64,
}

impl Fixtures {
    pub fn pinned() -> Self {
        serde_json::from_str(DEFAULT_FIXTURES).expect("bundled fixtures parse")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl Default for Fixtures {
    fn default() -> Self {
        Self::pinned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Duncan,
    Bpsk,
    Poisson,
    Jumpdiff,
    Mismatch,
    Doobmeyer,
    Martingale,
    Normalization,
    Determinism,
    All,
}

impl Suite {
    fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Duncan => &[1],
            Suite::Bpsk => &[2],
            Suite::Poisson => &[3],
            Suite::Jumpdiff => &[4],
            Suite::Mismatch => &[5],
            Suite::Doobmeyer => &[6, 7],
            Suite::Martingale => &[7],
            Suite::Normalization => &[8],
            Suite::Determinism => &[9],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {} ({}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub fixtures: Fixtures,
    pub workers: Option<usize>,
    pub progress: bool,
}

impl VerifyOptions {
    fn job(&self, n_paths: usize, seed: u64) -> McJob {
        let mut job = McJob::new(n_paths, seed).with_progress(self.progress);
        job.workers = self.workers;
        job
    }
}

/// Runs every criterion of `suite` in order.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CriterionResult>> {
    suite.criteria().iter().map(|&id| run_criterion(id, opts)).collect()
}

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> Result<CriterionResult> {
    match id {
        1 => duncan(opts),
        2 => bpsk(opts),
        3 => poisson(opts),
        4 => jumpdiff(opts),
        5 => mismatch(opts),
        6 => doob_meyer_pathwise(opts),
        7 => martingale(opts),
        8 => normalization(opts),
        9 => determinism(opts),
        _ => Err(Error::validation("criterion", format!("no criterion {id}"))),
    }
}

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, note: String) {
        self.ok &= ok;
        self.notes.push(if ok { note } else { format!("FAILED {note}") });
    }

    fn finish(self, id: u8, name: &str) -> CriterionResult {
        CriterionResult {
            id,
            name: name.to_string(),
            passed: self.ok,
            detail: self.notes.join("; "),
        }
    }
}

fn both(r: &RouteEstimates) -> (f64, f64, f64, f64) {
    let l = r.loss.as_ref().expect("loss route");
    let d = r.density.as_ref().expect("density route");
    (l.value, l.std_error, d.value, d.std_error)
}

fn routes_agree(c: &mut Check, label: &str, r: &RouteEstimates) {
    let (l, _, d, _) = both(r);
    let cse = r.combined_se().unwrap_or(f64::NAN);
    c.require(
        (l - d).abs() <= 3.0 * cse,
        format!("{label}: loss {l:.5} vs density {d:.5}, |diff| {:.2e} <= 3*{cse:.2e}", (l - d).abs()),
    );
}

fn duncan(opts: &VerifyOptions) -> Result<CriterionResult> {
    let fx = opts.fixtures.gaussian_conjugate_mi;
    let mut c = Check::new();
    let cf = gaussian_mi_closed_form(1.0, 1.0, 1.0);
    let quad = gaussian_mi_quadrature(1.0, 1.0, 1.0, 2000);
    c.require((cf - fx).abs() <= 1e-12, format!("closed form {cf:.12} vs fixture {fx:.12}"));
    c.require((quad - fx).abs() <= 1e-10, format!("quadrature {quad:.12} vs fixture"));

    let p = preset_gaussian_conjugate(1.0, 1.0, 1000, 1.0)?;
    let r = estimate_mi_with(&opts.job(20_000, 0x5eed_0001), &p.config, RouteChoice::Loss)?;
    let e = r.loss.expect("loss route");
    let tol = (3.0 * e.std_error).max(0.01 * fx);
    c.require(
        (e.value - fx).abs() <= tol,
        format!("loss route {:.5} ± {:.5} vs {fx:.6}, tol {tol:.5}", e.value, e.std_error),
    );
    Ok(c.finish(1, "Gaussian message, loss route vs closed form"))
}

fn bpsk(opts: &VerifyOptions) -> Result<CriterionResult> {
    let fx = opts.fixtures.bpsk_gaussian_mi;
    let mut c = Check::new();
    let gh = bpsk_awgn_mi(1.0);
    c.require((gh - fx).abs() <= 1e-8, format!("Gauss-Hermite {gh:.12} vs fixture {fx:.12}"));

    let p = preset_bpsk_gaussian(1.0, 1.0, 1000)?;
    let r = estimate_mi_with(&opts.job(20_000, 0x5eed_0002), &p.config, RouteChoice::Both)?;
    routes_agree(&mut c, "routes", &r);
    let (_, _, d, dse) = both(&r);
    c.require(
        (d - fx).abs() <= 3.0 * dse,
        format!("density {d:.5} ± {dse:.5} vs oracle {fx:.6}"),
    );
    Ok(c.finish(2, "BPSK, route agreement and quadrature oracle"))
}

fn poisson(opts: &VerifyOptions) -> Result<CriterionResult> {
    let fx = opts.fixtures.poisson_binary_mi;
    let mut c = Check::new();
    let exact = poisson_count_mi(&[1.0, 2.0], &[0.5, 0.5]);
    c.require((exact - fx).abs() <= 1e-12, format!("exact sum {exact:.12} vs fixture {fx:.12}"));

    let p = preset_poisson_binary(1.0, 1.0, 2000, 1.0, 2.0)?;
    let r = estimate_mi_with(&opts.job(50_000, 0x5eed_0003), &p.config, RouteChoice::Loss)?;
    let e = r.loss.expect("loss route");
    c.require(
        (e.value - fx).abs() <= 3.0 * e.std_error,
        format!("loss route {:.5} ± {:.5} vs {fx:.6}", e.value, e.std_error),
    );
    Ok(c.finish(3, "Poisson rates, loss route vs exact sum"))
}

fn jumpdiff(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut c = Check::new();
    let p = preset_jump_diffusion_feedback(1.0, 1.0, 500)?;
    let r = estimate_mi_with(&opts.job(50_000, 0x5eed_0004), &p.config, RouteChoice::Both)?;
    routes_agree(&mut c, "500 steps", &r);

    let fine = preset_jump_diffusion_feedback(1.0, 1.0, 1000)?;
    let r2 = estimate_mi_with(&opts.job(50_000, 0x5eed_0004), &fine.config, RouteChoice::Both)?;
    routes_agree(&mut c, "1000 steps", &r2);
    let (l1, s1, _, _) = both(&r);
    let (l2, s2, _, _) = both(&r2);
    let tol = (3.0 * s1.hypot(s2)).max(0.01 * l1.abs());
    c.require(
        (l2 - l1).abs() <= tol,
        format!("refinement shift {:.2e} <= {tol:.2e}", (l2 - l1).abs()),
    );
    Ok(c.finish(4, "jump-diffusion feedback, route agreement and refinement"))
}

fn mismatch(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut c = Check::new();
    let base = preset_bpsk_gaussian(1.0, 1.0, 1000)?;
    let (p, q) = preset_mismatch_pair(&base, &[0.9, 0.1])?;
    let r = estimate_kl_with(&opts.job(50_000, 0x5eed_0005), &p, &q, RouteChoice::Both)?;
    routes_agree(&mut c, "BPSK q=(0.9,0.1)", &r);

    let same = estimate_kl_with(&opts.job(2_000, 0x5eed_0015), &p, &p, RouteChoice::Both)?;
    let (l, ls, d, ds) = both(&same);
    c.require(
        l == 0.0 && d == 0.0 && ls == 0.0 && ds == 0.0,
        format!("P = Q gives loss {l}, density {d}"),
    );

    for name in PRESET_NAMES {
        let preset = preset_by_name(name, None)?;
        let (p, q) = default_mismatch_pair(&preset)?;
        let r = estimate_kl_with(&opts.job(10_000, 0x5eed_0025), &p, &q, RouteChoice::Loss)?;
        let e = r.loss.expect("loss route");
        c.require(
            e.value >= -3.0 * e.std_error,
            format!("{name}: KL {:.5} ± {:.5}", e.value, e.std_error),
        );
    }
    Ok(c.finish(5, "relative entropy, routes and nonnegativity"))
}

/// Simulates one path under the preset's model and decomposes both targets.
fn decompose_both(
    p: &ScenarioConfig,
    q: &ScenarioConfig,
    seed: u64,
) -> Result<(crate::doob_meyer::DecompositionTrace, crate::doob_meyer::DecompositionTrace)> {
    let truth = simulate_from_prior(p, seed)?;
    let (tp, tq) = mismatched_filter_pair(&project_observable(&truth), p, q)?;
    Ok((decompose_density(&truth, &tp, p)?, decompose_relative(&truth, &tp, &tq, p)?))
}

fn doob_meyer_pathwise(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut c = Check::new();
    for name in PRESET_NAMES {
        let mut mean_disc = [[0.0; 2]; 2];
        let mut exact = true;
        for (r, steps) in [500usize, 2000].into_iter().enumerate() {
            let preset = preset_by_name(name, Some(steps))?;
            let (p, q) = default_mismatch_pair(&preset)?;
            let job = opts.job(100, 0x5eed_0006);
            let samples = run_paths(&job, 4, |_, s| {
                let (d, rel) = decompose_both(&p, &q, s)?;
                let mut ok = 1.0;
                for t in [&d, &rel] {
                    let identity = t
                        .target
                        .iter()
                        .zip(&t.compensator)
                        .zip(&t.martingale_residual)
                        .all(|((x, a), m)| *m == x - a);
                    if !t.is_monotone() || !identity {
                        ok = 0.0;
                    }
                }
                Ok(vec![d.max_discrepancy(), rel.max_discrepancy(), ok, 0.0])
            })?;
            exact &= samples.column(2).iter().all(|&v| v == 1.0);
            for (i, m) in mean_disc[r].iter_mut().enumerate() {
                *m = StreamStats::from_slice(&samples.column(i)).mean;
            }
        }
        c.require(exact, format!("{name}: A monotone and target = A + M exact"));
        for (i, kind) in ["density", "relative"].into_iter().enumerate() {
            let (coarse, fine) = (mean_disc[0][i], mean_disc[1][i]);
            if coarse == 0.0 && fine == 0.0 {
                c.require(true, format!("{name}/{kind}: discrepancy identically 0"));
                continue;
            }
            let ratio = coarse / fine;
            c.require(
                (1.5..=8.0).contains(&ratio),
                format!("{name}/{kind}: discrepancy {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}"),
            );
        }
    }
    Ok(c.finish(6, "pathwise Doob-Meyer decomposition"))
}

fn martingale(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut c = Check::new();
    for name in PRESET_NAMES {
        let preset = preset_by_name(name, None)?;
        let (p, q) = default_mismatch_pair(&preset)?;
        let samples = run_paths(&opts.job(20_000, 0x5eed_0007), 2, |_, s| {
            let (d, rel) = decompose_both(&p, &q, s)?;
            Ok(vec![d.terminal_residual(), rel.terminal_residual()])
        })?;
        for (i, kind) in ["density", "relative"].into_iter().enumerate() {
            let st = StreamStats::from_slice(&samples.column(i));
            let se = st.std_error();
            c.require(
                st.mean.abs() <= 3.0 * se,
                format!("{name}/{kind}: mean M(T) {:.2e} ± {se:.2e}", st.mean),
            );
        }
    }
    Ok(c.finish(7, "martingale residual has mean zero"))
}

/// The preset's channel with no input: β ≡ 0 and every λ ≡ 1.
fn reference_scenario(preset: &ScenarioPreset) -> Result<ScenarioConfig> {
    let n = preset.config.levy().len();
    ScenarioConfig::finite(
        preset.config.snr(),
        *preset.config.grid(),
        preset.config.levy().clone(),
        vec![Hypothesis::from_spec("reference", 1.0, EncodingSpec::constant(0.0, vec![1.0; n]))],
    )
}

fn normalization(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut c = Check::new();
    for name in PRESET_NAMES {
        let preset = preset_by_name(name, None)?;
        let reference = reference_scenario(&preset)?;
        let model = &preset.config;
        let samples = run_paths(&opts.job(10_000, 0x5eed_0008), 1, |_, s| {
            let path = simulate_path(&reference, 0, s)?;
            let trace = filter_scenario(&project_observable(&path), model)?;
            Ok(vec![trace.marginal_log_lik(path.grid.steps()).exp()])
        })?;
        let st = StreamStats::from_slice(&samples.column(0));
        let se = st.std_error();
        c.require(
            (st.mean - 1.0).abs() <= 3.0 * se,
            format!("{name}: mean L(T) {:.4} ± {se:.4}", st.mean),
        );
    }
    Ok(c.finish(8, "likelihood ratio has unit mean under the reference measure"))
}

fn determinism(opts: &VerifyOptions) -> Result<CriterionResult> {
    let mut c = Check::new();
    let p = preset_jump_diffusion_feedback(1.0, 1.0, 200)?;
    let run = |w: usize| -> Result<String> {
        let job = McJob::new(2_000, 0x5eed_0009).with_workers(w);
        estimate_mi_with(&job, &p.config, RouteChoice::Both)?.to_json()
    };
    let reference = run(1)?;
    for w in [1usize, 2, 8] {
        let again = run(w)?;
        c.require(again == reference, format!("workers {w}: JSON identical"));
    }

    for name in PRESET_NAMES {
        let preset = preset_by_name(name, None)?;
        let fp = scenario_fingerprint(&preset.config);
        let cfg = &preset.config;
        let sweep = convergence_sweep(&opts.job(8_000, 0x5eed_0019), &[2_000, 8_000], Route::Loss, &fp, |_, s| {
            Ok(mi_path_values(cfg, s)?.0)
        })?;
        let ratio = sweep[1].std_error / sweep[0].std_error;
        c.require(
            (ratio - 0.5).abs() <= 0.3 * 0.5,
            format!("{name}: SE ratio at 4x paths {ratio:.3}"),
        );
    }
    Ok(c.finish(9, "determinism across workers and 1/sqrt(n) error scaling"))
}
