//! Causal Bayesian filtering of the channel output.
//!
//! For a finite hypothesis set the filter carries, per hypothesis, the log
//! of the likelihood ratio against the no-input reference measure:
//!
//! ```text
//! Δ ln L_i = √γ β_i ΔYc − (γ/2) β_i² dt + Σ_j [ N_j ln λ_ij − γ (λ_ij − 1) ν_j dt ]
//! ```
//!
//! Under the reference measure `ΔYc` is a Brownian increment and `N_j` is
//! Poisson with mean `γ ν_j dt`, so this is the exact per-step likelihood
//! ratio of the discretized model. Posterior weights at `t_k` use only
//! steps before `k`, and the causal estimates `β̂`, `λ̂` for step `k` are
//! the weight-averaged encodings.
//!
//! A Gaussian message with constant drift is filtered in closed form
//! instead ([`kalman_filter_gaussian`]).

use crate::channel::{evaluate_encoding, ObservablePath, OutputAccumulator};
use crate::error::{Error, Result};
use crate::model::{History, Message, ScenarioConfig, TimeGrid};

/// Log-likelihood assigned to a hypothesis ruled out by the data (a jump
/// observed where it has zero intensity). `exp` of it is below the smallest
/// subnormal, and excluded hypotheses get weight exactly zero.
pub const LOG_LIK_FLOOR: f64 = -745.0;

/// Output of a filter run on one observation record.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTrace {
    grid: TimeGrid,
    n_hyp: usize,
    n_atoms: usize,
    log_lik: Vec<f64>,
    weights: Vec<f64>,
    beta_hat: Vec<f64>,
    lambda_hat: Vec<f64>,
    marginal_log_lik: Vec<f64>,
    posterior_var: Option<Vec<f64>>,
    excluded: Vec<bool>,
}

impl FilterTrace {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Number of hypotheses tracked (0 for the closed-form Gaussian filter).
    pub fn hypothesis_count(&self) -> usize {
        self.n_hyp
    }

    pub fn atom_count(&self) -> usize {
        self.n_atoms
    }

    /// `ln L_i(t_k)` for every hypothesis, `k = 0..=steps`.
    pub fn log_lik(&self, k: usize) -> &[f64] {
        &self.log_lik[k * self.n_hyp..(k + 1) * self.n_hyp]
    }

    /// Posterior weights from data strictly before `t_k`, `k = 0..=steps`.
    pub fn weights(&self, k: usize) -> &[f64] {
        &self.weights[k * self.n_hyp..(k + 1) * self.n_hyp]
    }

    /// Causal drift estimate for step `k = 0..steps`.
    pub fn beta_hat(&self, k: usize) -> f64 {
        self.beta_hat[k]
    }

    pub fn beta_hat_series(&self) -> &[f64] {
        &self.beta_hat
    }

    /// Causal intensity estimates for step `k`, one per atom.
    pub fn lambda_hat(&self, k: usize) -> &[f64] {
        &self.lambda_hat[k * self.n_atoms..(k + 1) * self.n_atoms]
    }

    /// `ln L̄(t_k) = logsumexp_i(ln π_i + ln L_i(t_k))`, `k = 0..=steps`.
    pub fn marginal_log_lik(&self, k: usize) -> f64 {
        self.marginal_log_lik[k]
    }

    pub fn marginal_log_lik_series(&self) -> &[f64] {
        &self.marginal_log_lik
    }

    /// Posterior variance series of the closed-form Gaussian filter.
    pub fn posterior_var(&self) -> Option<&[f64]> {
        self.posterior_var.as_deref()
    }

    /// Whether hypothesis `i` was ruled out by an impossible jump.
    pub fn is_excluded(&self, i: usize) -> bool {
        self.excluded.get(i).copied().unwrap_or(false)
    }
}

/// `ln Σ exp(x_i)`, skipping `-inf` terms. Returns `-inf` for an empty or
/// all-`-inf` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = xs
        .into_iter()
        .filter(|x| *x > f64::NEG_INFINITY)
        .map(|x| (x - max).exp())
        .sum();
    max + s.ln()
}

/// One step of the per-hypothesis log-likelihood ratio. Returns `-inf` when a
/// jump is observed on an atom with zero intensity.
#[allow(clippy::too_many_arguments)]
pub(crate) fn log_lik_increment(
    snr: f64,
    dt: f64,
    beta: f64,
    dyc: f64,
    lambdas: &[f64],
    counts: &[u32],
    rates: &[f64],
) -> f64 {
    let mut inc = snr.sqrt() * beta * dyc - 0.5 * snr * beta * beta * dt;
    for ((&l, &n), &nu) in lambdas.iter().zip(counts).zip(rates) {
        if n > 0 {
            if l == 0.0 {
                return f64::NEG_INFINITY;
            }
            inc += n as f64 * l.ln();
        }
        inc -= snr * (l - 1.0) * nu * dt;
    }
    inc
}

/// Exact causal filter over the model's finite hypothesis set.
pub fn run_filter(obs: &ObservablePath, model: &ScenarioConfig) -> Result<FilterTrace> {
    obs.check_against(model)?;
    let set = model.hypotheses().ok_or_else(|| {
        Error::Unsupported("run_filter needs a finite hypothesis set; use the Gaussian filter".into())
    })?;
    let grid = *model.grid();
    let n = grid.steps();
    let m = set.len();
    let n_atoms = model.levy().len();
    let rates = model.levy().rates();
    let sizes = model.levy().sizes();
    let g = model.snr();
    let dt = grid.dt();

    let log_prior: Vec<f64> = set
        .iter()
        .map(|h| if h.prior > 0.0 { h.prior.ln() } else { f64::NEG_INFINITY })
        .collect();
    // Normalises away rounding in the priors' sum, so that equal
    // likelihoods give a marginal of exactly 0.
    let prior_norm = log_sum_exp(log_prior.iter().copied());
    let encodings: Vec<_> = set.iter().map(|h| h.encoding.clone()).collect();

    let mut log_lik = vec![0.0; (n + 1) * m];
    let mut weights = vec![0.0; (n + 1) * m];
    let mut beta_hat = Vec::with_capacity(n);
    let mut lambda_hat = vec![0.0; n * n_atoms];
    let mut marginal = Vec::with_capacity(n + 1);
    let mut excluded = vec![false; m];

    let mut betas = vec![0.0; m];
    let mut lambdas = vec![0.0; m * n_atoms];
    let mut acc = OutputAccumulator::new(obs.drift_offset());

    let cont = obs.cont_increments();
    let counts = obs.jump_counts();

    for k in 0..=n {
        let cur = k * m;
        let joint = |i: usize| {
            if excluded[i] {
                f64::NEG_INFINITY
            } else {
                log_prior[i] + log_lik[cur + i]
            }
        };
        let lse = log_sum_exp((0..m).map(joint));
        if lse == f64::NEG_INFINITY {
            // Only reachable after an impossible jump in step k - 1.
            let atom = (0..n_atoms)
                .find(|&j| counts[(k - 1) * n_atoms + j] > 0)
                .unwrap_or(0);
            return Err(Error::Inconsistent { step: k - 1, atom });
        }
        marginal.push(lse - prior_norm);
        for i in 0..m {
            let lj = joint(i);
            weights[cur + i] = if lj == f64::NEG_INFINITY { 0.0 } else { (lj - lse).exp() };
        }
        if k == n {
            break;
        }

        let history = History::new(k, grid.node(k), acc.value(&grid, k), &cont[..k], &counts[..k * n_atoms], n_atoms);
        let mut bh = 0.0;
        let lh = &mut lambda_hat[k * n_atoms..(k + 1) * n_atoms];
        for i in 0..m {
            let li = &mut lambdas[i * n_atoms..(i + 1) * n_atoms];
            betas[i] = evaluate_encoding(encodings[i].as_ref(), &history, model, li)?;
            let w = weights[cur + i];
            if w > 0.0 {
                bh += w * betas[i];
                for (slot, &l) in lh.iter_mut().zip(li.iter()) {
                    *slot += w * l;
                }
            }
        }
        beta_hat.push(bh);

        let step_counts = &counts[k * n_atoms..(k + 1) * n_atoms];
        let next = (k + 1) * m;
        for i in 0..m {
            if excluded[i] {
                log_lik[next + i] = LOG_LIK_FLOOR;
                continue;
            }
            let inc = log_lik_increment(
                g,
                dt,
                betas[i],
                cont[k],
                &lambdas[i * n_atoms..(i + 1) * n_atoms],
                step_counts,
                &rates,
            );
            if inc == f64::NEG_INFINITY {
                excluded[i] = true;
                log_lik[next + i] = LOG_LIK_FLOOR;
            } else {
                log_lik[next + i] = log_lik[cur + i] + inc;
            }
        }
        acc.advance(cont[k], step_counts, &sizes);
    }

    Ok(FilterTrace {
        grid,
        n_hyp: m,
        n_atoms,
        log_lik,
        weights,
        beta_hat,
        lambda_hat,
        marginal_log_lik: marginal,
        posterior_var: None,
        excluded,
    })
}

/// Closed-form filter for a constant Gaussian message `X ~ Normal(0, σ²)` on
/// the pure Gaussian channel:
///
/// ```text
/// β̂(t)    = √γ σ² Y(t) / (1 + γ σ² t)
/// var(t)   = σ² / (1 + γ σ² t)
/// ln L̄(t) = −½ ln(1 + γ σ² t) + γ σ² Y(t)² / (2 (1 + γ σ² t))
/// ```
///
/// On the grid these are exact posteriors of the discretized model.
pub fn kalman_filter_gaussian(obs: &ObservablePath, snr: f64, prior_var: f64) -> Result<FilterTrace> {
    if obs.n_atoms() > 0 {
        return Err(Error::Unsupported(
            "the conjugate Gaussian filter needs an empty Levy measure".into(),
        ));
    }
    if !(prior_var >= 0.0) {
        return Err(Error::validation("prior_var", "must be nonnegative"));
    }
    let grid = *obs.grid();
    let n = grid.steps();
    let cont = obs.cont_increments();
    let sqrt_g = snr.sqrt();

    let mut beta_hat = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n + 1);
    let mut marginal = Vec::with_capacity(n + 1);
    let mut acc = OutputAccumulator::new(0.0);
    for k in 0..=n {
        let t = grid.node(k);
        let y = acc.continuous();
        let denom = 1.0 + snr * prior_var * t;
        var.push(prior_var / denom);
        marginal.push(-0.5 * denom.ln() + snr * prior_var * y * y / (2.0 * denom));
        if k == n {
            break;
        }
        beta_hat.push(sqrt_g * prior_var * y / denom);
        acc.advance(cont[k], &[], &[]);
    }
    Ok(FilterTrace {
        grid,
        n_hyp: 0,
        n_atoms: 0,
        log_lik: Vec::new(),
        weights: Vec::new(),
        beta_hat,
        lambda_hat: Vec::new(),
        marginal_log_lik: marginal,
        posterior_var: Some(var),
        excluded: Vec::new(),
    })
}

/// Runs whichever filter fits the model's message law.
pub fn filter_scenario(obs: &ObservablePath, model: &ScenarioConfig) -> Result<FilterTrace> {
    match model.message() {
        Message::Finite(_) => run_filter(obs, model),
        Message::Gaussian { prior_var } => {
            obs.check_against(model)?;
            kalman_filter_gaussian(obs, model.snr(), *prior_var)
        }
    }
}

/// Filters the same observations under a matched model `P` and a
/// mismatched model `Q`.
pub fn mismatched_filter_pair(
    obs: &ObservablePath,
    model_p: &ScenarioConfig,
    model_q: &ScenarioConfig,
) -> Result<(FilterTrace, FilterTrace)> {
    model_p.same_channel(model_q)?;
    Ok((filter_scenario(obs, model_p)?, filter_scenario(obs, model_q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{project_observable, simulate_path};
    use crate::model::{EncodingSpec, Hypothesis, LevyMeasure};

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

    fn bpsk(steps: usize) -> ScenarioConfig {
        finite(
            1.0,
            &[],
            &[(0.5, EncodingSpec::constant(-1.0, vec![])), (0.5, EncodingSpec::constant(1.0, vec![]))],
            steps,
        )
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp([-1000.0, f64::NEG_INFINITY]);
        assert_eq!(v, -1000.0);
    }

    #[test]
    fn single_hypothesis_is_the_identity() {
        let s = finite(1.5, &[(0.5, 1.0)], &[(1.0, EncodingSpec::constant(0.7, vec![1.3]))], 30);
        let p = simulate_path(&s, 0, 4).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        for k in 0..=30 {
            assert_eq!(tr.weights(k), &[1.0]);
            assert_eq!(tr.marginal_log_lik(k), tr.log_lik(k)[0]);
        }
        for k in 0..30 {
            assert_eq!(tr.beta_hat(k), p.truth_beta[k]);
            assert_eq!(tr.lambda_hat(k), p.lambdas(k));
        }
        assert_eq!(tr.log_lik(0), &[0.0]);
    }

    #[test]
    fn symmetric_bpsk_starts_at_zero() {
        let s = bpsk(10);
        let p = simulate_path(&s, 1, 3).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        assert_eq!(tr.beta_hat(0), 0.0);
        assert_eq!(tr.log_lik(0), &[0.0, 0.0]);
    }

    #[test]
    fn one_jump_poisson_weights() {
        let s = finite(
            1.0,
            &[(1.0, 1.0)],
            &[(0.5, EncodingSpec::constant(0.0, vec![1.0])), (0.5, EncodingSpec::constant(0.0, vec![2.0]))],
            4,
        );
        let obs = ObservablePath::from_parts(&s, vec![0.0; 4], vec![0, 1, 0, 0], 0).unwrap();
        let tr = run_filter(&obs, &s).unwrap();
        let w = tr.weights(4);
        assert!((w[1] / w[0] - 2.0 * (-1f64).exp()).abs() < 1e-12);
        assert!((w[1] - 0.4238831152341709).abs() < 1e-12);
        let ll = tr.log_lik(4);
        assert!(ll[0].abs() < 1e-15);
        assert!((ll[1] - (2f64.ln() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn estimates_are_weighted_encodings() {
        let e0 = EncodingSpec::constant(-0.5, vec![0.5, 2.0]);
        let e1 = EncodingSpec::constant(1.5, vec![3.0, 0.25]);
        let s = finite(2.0, &[(-0.5, 1.0), (1.0, 0.5)], &[(0.3, e0), (0.7, e1)], 40);
        let p = simulate_path(&s, 1, 8).unwrap();
        let tr = run_filter(&project_observable(&p), &s).unwrap();
        for k in 0..40 {
            let w = tr.weights(k);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert_eq!(tr.beta_hat(k), w[0] * -0.5 + w[1] * 1.5);
            assert_eq!(tr.lambda_hat(k)[0], w[0] * 0.5 + w[1] * 3.0);
            assert_eq!(tr.lambda_hat(k)[1], w[0] * 2.0 + w[1] * 0.25);
        }
    }

    #[test]
    fn impossible_jumps() {
        let s = finite(
            1.0,
            &[(1.0, 1.0)],
            &[(0.5, EncodingSpec::constant(0.0, vec![0.0])), (0.5, EncodingSpec::constant(0.0, vec![1.0]))],
            4,
        )
        .with_strict_positivity(false);
        let obs = ObservablePath::from_parts(&s, vec![0.0; 4], vec![0, 1, 0, 0], 0).unwrap();
        let tr = run_filter(&obs, &s).unwrap();
        assert!(tr.is_excluded(0));
        assert_eq!(tr.weights(4), &[0.0, 1.0]);
        assert_eq!(tr.log_lik(4)[0], LOG_LIK_FLOOR);
        assert_eq!(tr.lambda_hat(3), &[1.0]);

        let none = finite(1.0, &[(1.0, 1.0)], &[(1.0, EncodingSpec::constant(0.0, vec![0.0]))], 4)
            .with_strict_positivity(false);
        let obs = ObservablePath::from_parts(&none, vec![0.0; 4], vec![0, 0, 1, 0], 0).unwrap();
        assert!(matches!(run_filter(&obs, &none), Err(Error::Inconsistent { step: 2, atom: 0 })));

        // Strict mode refuses the zero intensity up front.
        let strict = none.clone().with_strict_positivity(true);
        assert!(matches!(run_filter(&obs, &strict), Err(Error::Domain(_))));
    }

    #[test]
    fn kalman_examples() {
        let s = ScenarioConfig::new(1.0, TimeGrid::new(1.0, 4).unwrap(), LevyMeasure::empty(), Message::Gaussian { prior_var: 1.0 }).unwrap();
        let zero = ObservablePath::from_parts(&s, vec![0.0; 4], vec![], 0).unwrap();
        let tr = kalman_filter_gaussian(&zero, 1.0, 1.0).unwrap();
        assert!(tr.beta_hat_series().iter().all(|&b| b == 0.0));
        assert_eq!(tr.posterior_var().unwrap()[0], 1.0);
        assert_eq!(tr.beta_hat(0), 0.0);

        // Y(1) = 2 at t = 1: √γ σ² Y / (1 + γ σ² t) = 1. The trace only stores
        // estimates for steps 0..n, so evaluate one more step past the end.
        let s2 = s.clone().with_grid(TimeGrid::new(1.25, 5).unwrap());
        let obs = ObservablePath::from_parts(&s2, vec![0.5; 5], vec![], 0).unwrap();
        let tr = kalman_filter_gaussian(&obs, 1.0, 1.0).unwrap();
        assert!((tr.beta_hat(4) - 1.0).abs() < 1e-15);
        assert!((tr.posterior_var().unwrap()[4] - 0.5).abs() < 1e-15);

        let jumps = finite(1.0, &[(1.0, 1.0)], &[(1.0, EncodingSpec::constant(0.0, vec![]))], 4);
        let obs = ObservablePath::from_parts(&jumps, vec![0.0; 4], vec![0; 4], 0).unwrap();
        assert!(matches!(kalman_filter_gaussian(&obs, 1.0, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mismatched_pair_shares_likelihoods() {
        let p = bpsk(50);
        let q = p.with_message(Message::Finite(p.hypotheses().unwrap().with_priors(&[0.9, 0.1]).unwrap())).unwrap();
        let path = simulate_path(&p, 0, 21).unwrap();
        let obs = project_observable(&path);
        let (tp, tq) = mismatched_filter_pair(&obs, &p, &q).unwrap();
        for k in 0..=50 {
            assert_eq!(tp.log_lik(k), tq.log_lik(k));
        }
        assert_ne!(tp.weights(10), tq.weights(10));

        let (a, b) = mismatched_filter_pair(&obs, &p, &p).unwrap();
        assert_eq!(a, b);

        let certain = p.with_message(Message::Finite(p.hypotheses().unwrap().with_priors(&[0.0, 1.0]).unwrap())).unwrap();
        let (_, tc) = mismatched_filter_pair(&obs, &p, &certain).unwrap();
        assert!(tc.beta_hat_series().iter().all(|&b| b == 1.0));

        let other_grid = p.clone().with_grid(TimeGrid::new(1.0, 25).unwrap());
        assert!(mismatched_filter_pair(&obs, &p, &other_grid).is_err());
    }
}
