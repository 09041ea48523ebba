//! Pathwise integrands and Monte Carlo estimators for mutual information
//! and relative entropy between output laws.
//!
//! Each quantity is computed two ways on the same simulated paths:
//!
//! * the **loss** route integrates the SNR-scaled causal estimation loss
//!   `γ[ℓ_G(β, β̂) + Σ_j ℓ_P(λ_j, λ̂_j) ν_j] dt`;
//! * the **density** route averages a log-likelihood ratio (the information
//!   density for mutual information, `ln L̄^P − ln L̄^Q` for relative entropy).
//!
//! The two routes estimate the same number, so their agreement is a check.
//! All values are in nats.

use serde::{Deserialize, Serialize};

use crate::channel::{project_observable, simulate_from_prior, validate_assumptions, PathRecord};
use crate::error::{Error, Result};
use crate::filter::{filter_scenario, log_lik_increment, mismatched_filter_pair, FilterTrace, LOG_LIK_FLOOR};
use crate::io::{pair_fingerprint, scenario_fingerprint};
use crate::losses::{gauss_loss, poisson_loss};
use crate::mc::{run_paths, InfoEstimate, McJob, Route};
use crate::model::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteChoice {
    Loss,
    Density,
    Both,
}

/// Estimates from one or both routes. When both are present they were
/// computed on the same paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteEstimates {
    pub loss: Option<InfoEstimate>,
    pub density: Option<InfoEstimate>,
}

#[derive(Serialize)]
struct BothRoutes<'a> {
    loss: &'a InfoEstimate,
    density: &'a InfoEstimate,
    difference: f64,
    combined_se: f64,
}

impl RouteEstimates {
    /// `loss − density`, when both routes ran.
    pub fn difference(&self) -> Option<f64> {
        Some(self.loss.as_ref()?.value - self.density.as_ref()?.value)
    }

    /// `√(SE_loss² + SE_density²)`, when both routes ran.
    pub fn combined_se(&self) -> Option<f64> {
        let (l, d) = (self.loss.as_ref()?, self.density.as_ref()?);
        Some(l.std_error.hypot(d.std_error))
    }

    /// The single estimate, or the loss/density/difference record for both.
    pub fn to_json(&self) -> Result<String> {
        let s = match (&self.loss, &self.density) {
            (Some(l), Some(d)) => serde_json::to_string_pretty(&BothRoutes {
                loss: l,
                density: d,
                difference: l.value - d.value,
                combined_se: l.std_error.hypot(d.std_error),
            })?,
            (Some(e), None) | (None, Some(e)) => serde_json::to_string_pretty(e)?,
            (None, None) => "{}".to_string(),
        };
        Ok(s)
    }
}

fn check_grids(truth: &PathRecord, trace: &FilterTrace) -> Result<()> {
    if truth.grid != *trace.grid() {
        return Err(Error::validation("grid", "path and filter trace use different grids"));
    }
    Ok(())
}

fn poisson_term(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 && y == 0.0 {
        return Ok(0.0);
    }
    Ok(poisson_loss(x, y)?.value())
}

/// Unscaled loss rate `ℓ_G(β, β̂) + Σ_j ℓ_P(λ_j, λ̂_j) ν_j` of one step.
pub(crate) fn step_loss(beta: f64, beta_hat: f64, lambdas: &[f64], lambda_hat: &[f64], rates: &[f64]) -> Result<f64> {
    let mut v = gauss_loss(beta, beta_hat).value();
    for ((&l, &lh), &nu) in lambdas.iter().zip(lambda_hat).zip(rates) {
        v += poisson_term(l, lh)? * nu;
    }
    Ok(v)
}

/// Integrated causal estimation loss of one path:
/// `γ Σ_k [ℓ_G(β_k, β̂_k) + Σ_j ℓ_P(λ_kj, λ̂_kj) ν_j] dt`.
pub fn path_estimation_loss(truth: &PathRecord, trace: &FilterTrace, scenario: &ScenarioConfig) -> Result<f64> {
    check_grids(truth, trace)?;
    let rates = scenario.levy().rates();
    let g = scenario.snr();
    let dt = truth.grid.dt();
    let mut total = 0.0;
    for k in 0..truth.grid.steps() {
        total += g * step_loss(truth.truth_beta[k], trace.beta_hat(k), truth.lambdas(k), trace.lambda_hat(k), &rates)? * dt;
    }
    Ok(total)
}

/// The same integrand evaluated with a mismatched filter's estimates.
pub fn path_mismatch_loss(truth: &PathRecord, trace_q: &FilterTrace, scenario: &ScenarioConfig) -> Result<f64> {
    path_estimation_loss(truth, trace_q, scenario)
}

/// Information density value with a flag for hypotheses that the data ruled
/// out (whose log-likelihood sits at the floor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub floored: bool,
}

/// `ln L_α(T) − ln L̄(T)` from a finite-hypothesis filter trace.
pub fn path_information_density(trace: &FilterTrace, alpha_index: usize) -> Result<DensityValue> {
    if alpha_index >= trace.hypothesis_count() {
        return Err(Error::validation(
            "alpha_index",
            format!("index {alpha_index} outside {} hypotheses", trace.hypothesis_count()),
        ));
    }
    let n = trace.grid().steps();
    let ll = trace.log_lik(n)[alpha_index];
    Ok(DensityValue {
        value: ll - trace.marginal_log_lik(n),
        floored: trace.is_excluded(alpha_index) || ll <= LOG_LIK_FLOOR,
    })
}

/// `ln L(t_k)` of the true message for every node, computed from the path's
/// own drift and intensities.
pub fn truth_log_lik_series(truth: &PathRecord, scenario: &ScenarioConfig) -> Vec<f64> {
    let rates = scenario.levy().rates();
    let g = scenario.snr();
    let dt = truth.grid.dt();
    let mut out = Vec::with_capacity(truth.grid.steps() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 0..truth.grid.steps() {
        let inc = log_lik_increment(g, dt, truth.truth_beta[k], truth.cont_increments[k], truth.lambdas(k), truth.counts(k), &rates);
        acc = if inc == f64::NEG_INFINITY { LOG_LIK_FLOOR } else { acc + inc };
        out.push(acc);
    }
    out
}

/// Conditional log-likelihood of the true message at node `k`: read from the
/// trace for finite hypothesis sets, recomputed from the path otherwise.
pub(crate) fn conditional_log_lik(truth: &PathRecord, trace: &FilterTrace, scenario: &ScenarioConfig) -> Vec<f64> {
    if trace.hypothesis_count() > 0 {
        (0..=truth.grid.steps())
            .map(|k| trace.log_lik(k)[truth.alpha_index])
            .collect()
    } else {
        truth_log_lik_series(truth, scenario)
    }
}

fn ensure_assumptions(scenario: &ScenarioConfig, seed: u64) -> Result<()> {
    if scenario.check_assumptions() {
        if let Some(w) = validate_assumptions(scenario, 64, seed)?.warning {
            return Err(Error::validation("scenario", format!("bounded-energy check failed: {w}")));
        }
    }
    Ok(())
}

/// Loss-route and density-route values of one path drawn from the prior.
pub fn mi_path_values(scenario: &ScenarioConfig, path_seed: u64) -> Result<(f64, f64)> {
    mi_path_values_flagged(scenario, path_seed).map(|(l, d, _)| (l, d))
}

/// As [`mi_path_values`], plus whether the density hit the likelihood floor.
fn mi_path_values_flagged(scenario: &ScenarioConfig, path_seed: u64) -> Result<(f64, f64, bool)> {
    let truth = simulate_from_prior(scenario, path_seed)?;
    let trace = filter_scenario(&project_observable(&truth), scenario)?;
    let loss = path_estimation_loss(&truth, &trace, scenario)?;
    let n = truth.grid.steps();
    let (density, floored) = if trace.hypothesis_count() > 0 {
        let d = path_information_density(&trace, truth.alpha_index)?;
        (d.value, d.floored)
    } else {
        (truth_log_lik_series(&truth, scenario)[n] - trace.marginal_log_lik(n), false)
    };
    Ok((loss, density, floored))
}

/// Loss-route and density-route relative-entropy values of one path
/// simulated under `P`.
pub fn kl_path_values(model_p: &ScenarioConfig, model_q: &ScenarioConfig, path_seed: u64) -> Result<(f64, f64)> {
    let truth = simulate_from_prior(model_p, path_seed)?;
    let (tp, tq) = mismatched_filter_pair(&project_observable(&truth), model_p, model_q)?;
    let loss = path_mismatch_loss(&truth, &tq, model_p)? - path_estimation_loss(&truth, &tp, model_p)?;
    let n = truth.grid.steps();
    Ok((loss, tp.marginal_log_lik(n) - tq.marginal_log_lik(n)))
}

fn collect_routes(
    job: &McJob,
    route: RouteChoice,
    fingerprint: &str,
    warnings: Vec<String>,
    f: impl Fn(u64) -> Result<(f64, f64, bool)> + Sync,
) -> Result<RouteEstimates> {
    let samples = run_paths(job, 3, |_, s| f(s).map(|(l, d, fl)| vec![l, d, if fl { 1.0 } else { 0.0 }]))?;
    let floored = samples.column(2).iter().filter(|&&x| x > 0.0).count();
    let mut density_warnings = warnings.clone();
    if floored > 0 {
        density_warnings.push(format!(
            "{floored} path(s) hit the log-likelihood floor; the density route is not reliable"
        ));
    }
    let tag = |mut e: InfoEstimate, w: &[String]| {
        e.warnings.extend_from_slice(w);
        e
    };
    let loss = matches!(route, RouteChoice::Loss | RouteChoice::Both)
        .then(|| tag(samples.estimate(0, Route::Loss, fingerprint), &warnings));
    let density = matches!(route, RouteChoice::Density | RouteChoice::Both)
        .then(|| tag(samples.estimate(1, Route::Density, fingerprint), &density_warnings));
    Ok(RouteEstimates { loss, density })
}

/// Mutual information `I(α; Y^T)` by Monte Carlo.
pub fn estimate_mi_with(job: &McJob, scenario: &ScenarioConfig, route: RouteChoice) -> Result<RouteEstimates> {
    if job.n_paths < 2 {
        return Err(Error::validation("n_paths", "need at least two paths"));
    }
    ensure_assumptions(scenario, job.seed)?;
    collect_routes(job, route, &scenario_fingerprint(scenario), Vec::new(), |s| mi_path_values_flagged(scenario, s))
}

pub fn estimate_mi(scenario: &ScenarioConfig, route: RouteChoice, n_paths: usize, seed: u64) -> Result<RouteEstimates> {
    estimate_mi_with(&McJob::new(n_paths, seed), scenario, route)
}

/// Relative entropy `D(P_Y ‖ Q_Y)` between the output laws under two
/// message models, by Monte Carlo under `P`.
pub fn estimate_kl_with(job: &McJob, model_p: &ScenarioConfig, model_q: &ScenarioConfig, route: RouteChoice) -> Result<RouteEstimates> {
    if job.n_paths < 2 {
        return Err(Error::validation("n_paths", "need at least two paths"));
    }
    model_p.same_channel(model_q)?;
    ensure_assumptions(model_p, job.seed)?;
    let mut warnings = Vec::new();
    if let (Some(p), Some(q)) = (model_p.hypotheses(), model_q.hypotheses()) {
        if p.priors().iter().zip(q.priors()).any(|(&a, b)| a > 0.0 && b == 0.0) {
            warnings.push(
                "Q gives zero prior to hypotheses that P supports; the estimate may be large and \
                 the density route relies on the likelihood floor"
                    .to_string(),
            );
        }
    }
    let fp = pair_fingerprint(model_p, model_q);
    collect_routes(job, route, &fp, warnings, |s| {
        kl_path_values(model_p, model_q, s).map(|(l, d)| (l, d, false))
    })
}

pub fn estimate_kl(model_p: &ScenarioConfig, model_q: &ScenarioConfig, route: RouteChoice, n_paths: usize, seed: u64) -> Result<RouteEstimates> {
    estimate_kl_with(&McJob::new(n_paths, seed), model_p, model_q, route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::simulate_path;
    use crate::filter::run_filter;
    use crate::model::{EncodingSpec, Hypothesis, LevyMeasure, Message, TimeGrid};

    fn finite(snr: f64, atoms: &[(f64, f64)], encs: &[(f64, EncodingSpec)], steps: usize) -> ScenarioConfig {
        ScenarioConfig::finite(
            snr,
            TimeGrid::new(1.0, steps).unwrap(),
            LevyMeasure::new(atoms).unwrap(),
            encs.iter()
                .enumerate()
                .map(|(i, (p, e))| Hypothesis::from_spec(format!("h{i}"), *p, e.clone()))
                .collect(),
        )
        .unwrap()
    }

    fn bpsk(snr: f64, steps: usize) -> ScenarioConfig {
        finite(snr, &[], &[(0.5, EncodingSpec::constant(-1.0, vec![])), (0.5, EncodingSpec::constant(1.0, vec![]))], steps)
    }

    fn with_prior(s: &ScenarioConfig, p: &[f64]) -> ScenarioConfig {
        s.with_message(Message::Finite(s.hypotheses().unwrap().with_priors(p).unwrap())).unwrap()
    }

    #[test]
    fn single_hypothesis_has_no_loss_or_density() {
        let s = finite(1.0, &[(1.0, 1.0)], &[(1.0, EncodingSpec::constant(0.4, vec![1.7]))], 40);
        let p = simulate_path(&s, 0, 1).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        assert_eq!(path_estimation_loss(&p, &tr, &s).unwrap(), 0.0);
        assert_eq!(path_information_density(&tr, 0).unwrap().value, 0.0);
        let est = estimate_mi(&s, RouteChoice::Both, 20, 1).unwrap();
        for e in [est.loss.unwrap(), est.density.unwrap()] {
            assert_eq!((e.value, e.std_error), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_snr_loss_vanishes() {
        let s = finite(0.0, &[(1.0, 1.0)], &[(0.5, EncodingSpec::constant(-1.0, vec![2.0])), (0.5, EncodingSpec::constant(1.0, vec![0.5]))], 20);
        let p = simulate_path(&s, 1, 3).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        assert_eq!(path_estimation_loss(&p, &tr, &s).unwrap(), 0.0);
        let q = with_prior(&s, &[0.9, 0.1]);
        let (_, tq) = mismatched_filter_pair(&project_observable(&p), &s, &q).unwrap();
        assert_eq!(path_mismatch_loss(&p, &tq, &s).unwrap(), 0.0);
    }

    #[test]
    fn zero_snr_uninformative_density() {
        let s = finite(0.0, &[(1.0, 1.0)], &[(0.5, EncodingSpec::constant(-1.0, vec![1.0])), (0.5, EncodingSpec::constant(1.0, vec![1.0]))], 20);
        let p = simulate_path(&s, 1, 3).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        assert_eq!(path_information_density(&tr, 1).unwrap().value, 0.0);
    }

    #[test]
    fn first_bpsk_step_contribution() {
        let s = bpsk(1.0, 1);
        let p = simulate_path(&s, 1, 5).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        let loss = path_estimation_loss(&p, &tr, &s).unwrap();
        assert_eq!(loss, 0.5 * 1.0 * 1.0);
    }

    #[test]
    fn certain_wrong_prior_mismatch() {
        let s = bpsk(2.0, 10);
        let q = with_prior(&s, &[0.0, 1.0]);
        // Truth from the first hypothesis (β = -1), Q certain of β = +1.
        let p = simulate_path(&s, 0, 5).unwrap();
        let (_, tq) = mismatched_filter_pair(&project_observable(&p), &s, &q).unwrap();
        let v = path_mismatch_loss(&p, &tq, &s).unwrap();
        assert!((v - 2.0 * 2.0 * 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn one_jump_density() {
        let s = finite(1.0, &[(1.0, 1.0)], &[(0.5, EncodingSpec::constant(0.0, vec![1.0])), (0.5, EncodingSpec::constant(0.0, vec![2.0]))], 4);
        let obs = crate::channel::ObservablePath::from_parts(&s, vec![0.0; 4], vec![0, 0, 1, 0], 0).unwrap();
        let tr = run_filter(&obs, &s).unwrap();
        let d = path_information_density(&tr, 1).unwrap();
        let expect = (2.0 * (-1f64).exp()).ln() - (0.5 + (-1f64).exp()).ln();
        assert!((d.value - expect).abs() < 1e-12);
        assert!((d.value - (-0.16515035281216045)).abs() < 1e-12);
        assert!(!d.floored);
        assert!(path_information_density(&tr, 2).is_err());
    }

    #[test]
    fn matched_mismatch_equals_estimation_loss() {
        let s = finite(1.0, &[(0.5, 2.0)], &[(0.3, EncodingSpec::constant(-1.0, vec![0.5])), (0.7, EncodingSpec::constant(0.5, vec![2.0]))], 50);
        let p = simulate_path(&s, 0, 12).unwrap();
        let (tp, tq) = mismatched_filter_pair(&project_observable(&p), &s, &s).unwrap();
        assert_eq!(path_mismatch_loss(&p, &tq, &s).unwrap(), path_estimation_loss(&p, &tp, &s).unwrap());
    }

    #[test]
    fn identical_models_give_zero_kl() {
        let s = bpsk(1.0, 50);
        let est = estimate_kl(&s, &s, RouteChoice::Both, 50, 4).unwrap();
        assert_eq!(est.loss.as_ref().unwrap().value, 0.0);
        assert_eq!(est.density.as_ref().unwrap().value, 0.0);
        assert_eq!(est.difference(), Some(0.0));
    }

    #[test]
    fn zero_snr_kl_is_zero() {
        let s = finite(0.0, &[(1.0, 1.0)], &[(0.5, EncodingSpec::constant(-1.0, vec![1.0])), (0.5, EncodingSpec::constant(1.0, vec![1.0]))], 20);
        let q = with_prior(&s, &[0.9, 0.1]);
        let est = estimate_kl(&s, &q, RouteChoice::Both, 30, 2).unwrap();
        assert_eq!(est.loss.unwrap().value, 0.0);
        assert_eq!(est.density.unwrap().value, 0.0);
    }

    #[test]
    fn kl_rejects_incompatible_models() {
        let s = bpsk(1.0, 50);
        let other = bpsk(1.0, 40);
        assert!(estimate_kl(&s, &other, RouteChoice::Loss, 10, 1).unwrap_err().is_validation());
        assert!(estimate_mi(&s, RouteChoice::Loss, 1, 1).is_err());
    }

    #[test]
    fn deterministic_estimates() {
        let s = bpsk(1.0, 100);
        let a = estimate_mi(&s, RouteChoice::Both, 200, 9).unwrap();
        let b = estimate_mi(&s, RouteChoice::Both, 200, 9).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let json: serde_json::Value = serde_json::from_str(&a.to_json().unwrap()).unwrap();
        assert!(json["loss"]["value"].is_f64());
        assert!(json["difference"].is_f64());
        assert_eq!(json["density"]["route"], "density");
    }

    #[test]
    fn assumption_check_mode_blocks_gaussian_message() {
        let s = ScenarioConfig::new(1.0, TimeGrid::new(1.0, 20).unwrap(), LevyMeasure::empty(), Message::Gaussian { prior_var: 1.0 })
            .unwrap()
            .with_assumption_check(true);
        assert!(estimate_mi(&s, RouteChoice::Loss, 10, 1).unwrap_err().is_validation());
        assert!(estimate_mi(&s.with_assumption_check(false), RouteChoice::Loss, 10, 1).is_ok());
    }
}
