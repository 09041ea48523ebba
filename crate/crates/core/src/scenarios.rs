//! Built-in scenarios with known answers, and the independent oracle
//! procedures that produce those answers.
//!
//! The oracles here never touch the simulator or the filters: they are
//! closed forms, Gauss–Hermite quadrature and exact sums over Poisson counts.

use crate::error::{Error, Result};
use crate::model::{EncodingSpec, Hypothesis, LevyMeasure, Message, ScenarioConfig, TimeGrid};

/// How a preset's reference value is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    ClosedForm(f64),
    Quadrature(f64),
    ExactSum(f64),
    /// No reference value; the two estimator routes check each other.
    CrossRoute,
}

impl Oracle {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Oracle::ClosedForm(v) | Oracle::Quadrature(v) | Oracle::ExactSum(v) => Some(v),
            Oracle::CrossRoute => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub config: ScenarioConfig,
    pub oracle: Oracle,
    /// Set when the preset is known to fail the bounded-energy check.
    pub assumption_flagged: bool,
}

/// Names accepted by [`preset_by_name`].
pub const PRESET_NAMES: [&str; 4] = [
    "gaussian-conjugate",
    "bpsk-gaussian",
    "poisson-binary",
    "jump-diffusion-feedback",
];

// ---------------------------------------------------------------- oracles

/// Gauss–Hermite nodes and weights for `∫ e^{-x²} f(x) dx`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^(-1/4)
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mutual information (nats) of equiprobable ±1 inputs on the scalar
/// Gaussian channel `y = √s·x + N(0, 1)`, by 40-node Gauss–Hermite
/// quadrature:
/// `ln 2 − E_Z[ln(1 + exp(−2s − 2√s Z))]`.
pub fn bpsk_awgn_mi(effective_snr: f64) -> f64 {
    if effective_snr <= 0.0 {
        return 0.0;
    }
    let (x, w) = gauss_hermite(40);
    let rs = effective_snr.sqrt();
    let e: f64 = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * softplus(-2.0 * effective_snr - 2.0 * rs * std::f64::consts::SQRT_2 * xi))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt();
    std::f64::consts::LN_2 - e
}

/// Mutual information (nats) between a message with prior `priors` and a
/// Poisson count with mean `means[i]` under message `i`, summed past the
/// largest mean until a term's mixture mass drops below `1e-20`.
pub fn poisson_count_mi(means: &[f64], priors: &[f64]) -> f64 {
    assert_eq!(means.len(), priors.len());
    let max_mean = means.iter().copied().fold(0.0, f64::max);
    let log_pmf = |mu: f64, n: usize, log_fact: f64| -> f64 {
        if mu == 0.0 {
            if n == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            n as f64 * mu.ln() - mu - log_fact
        }
    };
    let mut total = 0.0;
    let mut log_fact = 0.0;
    let mut n = 0usize;
    loop {
        if n > 0 {
            log_fact += (n as f64).ln();
        }
        let p: Vec<f64> = means.iter().map(|&mu| log_pmf(mu, n, log_fact).exp()).collect();
        let mix: f64 = p.iter().zip(priors).map(|(pi, w)| pi * w).sum();
        if mix > 0.0 {
            for (pi, w) in p.iter().zip(priors) {
                if *pi > 0.0 && *w > 0.0 {
                    total += w * pi * (pi / mix).ln();
                }
            }
        }
        n += 1;
        if (mix < 1e-20 && n as f64 > max_mean) || n > 100_000 {
            break;
        }
    }
    total
}

/// `½ ln(1 + γ T σ²)`.
pub fn gaussian_mi_closed_form(snr: f64, horizon: f64, prior_var: f64) -> f64 {
    0.5 * (snr * horizon * prior_var).ln_1p()
}

/// Composite Simpson quadrature of the integrated posterior-variance
/// integrand `γ/2 · σ²/(1 + γ t σ²)` over `[0, T]`.
pub fn gaussian_mi_quadrature(snr: f64, horizon: f64, prior_var: f64, panels: usize) -> f64 {
    let panels = panels.max(2) & !1;
    let f = |t: f64| 0.5 * snr * prior_var / (1.0 + snr * t * prior_var);
    let h = horizon / panels as f64;
    let mut s = f(0.0) + f(horizon);
    for i in 1..panels {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

// ---------------------------------------------------------------- presets

/// Pure Gaussian channel with a constant `Normal(0, σ²)` message.
pub fn preset_gaussian_conjugate(snr: f64, horizon: f64, steps: usize, prior_var: f64) -> Result<ScenarioPreset> {
    let config = ScenarioConfig::new(
        snr,
        TimeGrid::new(horizon, steps)?,
        LevyMeasure::empty(),
        Message::Gaussian { prior_var },
    )?;
    Ok(ScenarioPreset {
        name: "gaussian-conjugate",
        config,
        oracle: Oracle::ClosedForm(gaussian_mi_closed_form(snr, horizon, prior_var)),
        assumption_flagged: prior_var > 0.0,
    })
}

/// Equiprobable constant drift `β ∈ {+1, −1}` on the pure Gaussian channel.
pub fn preset_bpsk_gaussian(snr: f64, horizon: f64, steps: usize) -> Result<ScenarioPreset> {
    let config = ScenarioConfig::finite(
        snr,
        TimeGrid::new(horizon, steps)?,
        LevyMeasure::empty(),
        vec![
            Hypothesis::from_spec("plus", 0.5, EncodingSpec::constant(1.0, vec![])),
            Hypothesis::from_spec("minus", 0.5, EncodingSpec::constant(-1.0, vec![])),
        ],
    )?;
    Ok(ScenarioPreset {
        name: "bpsk-gaussian",
        config,
        oracle: Oracle::Quadrature(bpsk_awgn_mi(snr * horizon)),
        assumption_flagged: false,
    })
}

/// Unit jumps at rate `λ ∈ {λ0, λ1}`, equiprobable; the Brownian part
/// carries no information.
pub fn preset_poisson_binary(snr: f64, horizon: f64, steps: usize, lambda0: f64, lambda1: f64) -> Result<ScenarioPreset> {
    let config = ScenarioConfig::finite(
        snr,
        TimeGrid::new(horizon, steps)?,
        LevyMeasure::new(&[(1.0, 1.0)])?,
        vec![
            Hypothesis::from_spec("low", 0.5, EncodingSpec::constant(0.0, vec![lambda0])),
            Hypothesis::from_spec("high", 0.5, EncodingSpec::constant(0.0, vec![lambda1])),
        ],
    )?;
    let means = [snr * lambda0 * horizon, snr * lambda1 * horizon];
    Ok(ScenarioPreset {
        name: "poisson-binary",
        config,
        oracle: Oracle::ExactSum(poisson_count_mi(&means, &[0.5, 0.5])),
        assumption_flagged: false,
    })
}

fn feedback_encoding(alpha: f64) -> EncodingSpec {
    EncodingSpec::Feedback {
        threshold: 0.0,
        beta_below: alpha,
        beta_above: 0.5 * alpha,
        lambda_gain: alpha,
        lambda_min: 0.1,
        lambda_max: 10.0,
    }
}

/// Jump-diffusion with output feedback in both drift and intensities:
/// `β = α·(1 if Y(t−) < 0 else ½)`, `λ_z = exp(α z tanh Y(t−))` clamped to
/// `[0.1, 10]`, over `ν = {−0.5: 1, 1: 0.5}` and `α ∈ {+1, −1}`.
pub fn preset_jump_diffusion_feedback(snr: f64, horizon: f64, steps: usize) -> Result<ScenarioPreset> {
    let config = ScenarioConfig::finite(
        snr,
        TimeGrid::new(horizon, steps)?,
        LevyMeasure::new(&[(-0.5, 1.0), (1.0, 0.5)])?,
        vec![
            Hypothesis::from_spec("plus", 0.5, feedback_encoding(1.0)),
            Hypothesis::from_spec("minus", 0.5, feedback_encoding(-1.0)),
        ],
    )?;
    Ok(ScenarioPreset {
        name: "jump-diffusion-feedback",
        config,
        oracle: Oracle::CrossRoute,
        assumption_flagged: false,
    })
}

/// The feedback preset with a single message value (mutual information 0).
pub fn preset_jump_diffusion_feedback_single(snr: f64, horizon: f64, steps: usize) -> Result<ScenarioPreset> {
    let base = preset_jump_diffusion_feedback(snr, horizon, steps)?;
    let config = ScenarioConfig::finite(
        snr,
        *base.config.grid(),
        base.config.levy().clone(),
        vec![Hypothesis::from_spec("plus", 1.0, feedback_encoding(1.0))],
    )?;
    Ok(ScenarioPreset {
        config,
        oracle: Oracle::ClosedForm(0.0),
        ..base
    })
}

/// `(P, Q)` with `P` the preset and `Q` the same encodings under `q_prior`.
pub fn preset_mismatch_pair(base: &ScenarioPreset, q_prior: &[f64]) -> Result<(ScenarioConfig, ScenarioConfig)> {
    let set = base.config.hypotheses().ok_or_else(|| {
        Error::Unsupported("prior replacement needs a finite hypothesis set".into())
    })?;
    let q = base.config.with_message(Message::Finite(set.with_priors(q_prior)?))?;
    Ok((base.config.clone(), q))
}

/// `(P, Q)` for a Gaussian-message preset, with `Q` using prior variance `q_prior_var`.
pub fn gaussian_mismatch_pair(base: &ScenarioPreset, q_prior_var: f64) -> Result<(ScenarioConfig, ScenarioConfig)> {
    if !matches!(base.config.message(), Message::Gaussian { .. }) {
        return Err(Error::Unsupported("expected a Gaussian-message preset".into()));
    }
    let q = base.config.with_message(Message::Gaussian { prior_var: q_prior_var })?;
    Ok((base.config.clone(), q))
}

/// Preset with its default parameters; `steps` overrides the default grid.
pub fn preset_by_name(name: &str, steps: Option<usize>) -> Result<ScenarioPreset> {
    match name {
        "gaussian-conjugate" => preset_gaussian_conjugate(1.0, 1.0, steps.unwrap_or(1000), 1.0),
        "bpsk-gaussian" => preset_bpsk_gaussian(1.0, 1.0, steps.unwrap_or(1000)),
        "poisson-binary" => preset_poisson_binary(1.0, 1.0, steps.unwrap_or(2000), 1.0, 2.0),
        "jump-diffusion-feedback" => preset_jump_diffusion_feedback(1.0, 1.0, steps.unwrap_or(500)),
        other => Err(Error::validation(
            "preset",
            format!("unknown preset '{other}' (known: {})", PRESET_NAMES.join(", ")),
        )),
    }
}

/// The default mismatched model paired with each named preset.
pub fn default_mismatch_pair(preset: &ScenarioPreset) -> Result<(ScenarioConfig, ScenarioConfig)> {
    match preset.config.message() {
        Message::Gaussian { .. } => gaussian_mismatch_pair(preset, 2.0),
        Message::Finite(set) => {
            let mut q = vec![0.1 / (set.len().max(2) - 1) as f64; set.len()];
            q[0] = if set.len() == 1 { 1.0 } else { 0.9 };
            preset_mismatch_pair(preset, &q)
        }
    }
}
