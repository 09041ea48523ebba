use std::sync::Arc;

use crate::error::{Error, Result};

use super::encoding::{Encoding, EncodingSpec};
use super::grid::TimeGrid;
use super::levy::LevyMeasure;

/// Default strict-positivity floor for intensity multipliers.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Default ceiling on the expected jump count per atom per step.
pub const MAX_EXPECTED_JUMPS: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub label: String,
    pub prior: f64,
    pub encoding: Arc<dyn Encoding>,
}

impl Hypothesis {
    pub fn new(label: impl Into<String>, prior: f64, encoding: impl Encoding + 'static) -> Self {
        Self {
            label: label.into(),
            prior,
            encoding: Arc::new(encoding),
        }
    }

    pub fn from_spec(label: impl Into<String>, prior: f64, spec: EncodingSpec) -> Self {
        Self::new(label, prior, spec)
    }
}

/// A finite message alphabet with its prior.
#[derive(Debug, Clone)]
pub struct HypothesisSet {
    hypotheses: Vec<Hypothesis>,
}

impl HypothesisSet {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::validation("hypotheses", "need at least one hypothesis"));
        }
        if hypotheses.iter().any(|h| !(h.prior >= 0.0) || !h.prior.is_finite()) {
            return Err(Error::validation("hypotheses.prior", "priors must be nonnegative"));
        }
        let total: f64 = hypotheses.iter().map(|h| h.prior).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(
                "hypotheses.prior",
                format!("priors must sum to 1 (got {total})"),
            ));
        }
        Ok(Self { hypotheses })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Hypothesis> {
        self.hypotheses.get(i)
    }

    pub fn priors(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|h| h.prior).collect()
    }

    /// Same encodings, new prior.
    pub fn with_priors(&self, priors: &[f64]) -> Result<Self> {
        if priors.len() != self.hypotheses.len() {
            return Err(Error::validation(
                "hypotheses.prior",
                format!("expected {} priors, got {}", self.len(), priors.len()),
            ));
        }
        let hypotheses = self
            .hypotheses
            .iter()
            .zip(priors)
            .map(|(h, &p)| Hypothesis {
                prior: p,
                ..h.clone()
            })
            .collect();
        Self::new(hypotheses)
    }
}

/// The law of the message.
#[derive(Debug, Clone)]
pub enum Message {
    /// Finitely many hypotheses; filtered exactly by likelihood recursion.
    Finite(HypothesisSet),
    /// `β ≡ X` with `X ~ Normal(0, prior_var)` and no jump modulation;
    /// filtered in closed form.
    Gaussian { prior_var: f64 },
}

/// Full channel and message description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    snr: f64,
    grid: TimeGrid,
    levy: LevyMeasure,
    message: Message,
    strict_positivity: bool,
    lambda_floor: f64,
    max_expected_jumps: f64,
    check_assumptions: bool,
}

impl ScenarioConfig {
    pub fn new(snr: f64, grid: TimeGrid, levy: LevyMeasure, message: Message) -> Result<Self> {
        if !(snr >= 0.0) || !snr.is_finite() {
            return Err(Error::validation("snr", "snr must be finite and nonnegative"));
        }
        match &message {
            Message::Finite(set) => {
                for h in set.iter() {
                    if let Some(spec) = h.encoding.to_spec() {
                        spec.validate(levy.len())?;
                    }
                }
            }
            Message::Gaussian { prior_var } => {
                if !(*prior_var >= 0.0) || !prior_var.is_finite() {
                    return Err(Error::validation("prior_var", "must be finite and nonnegative"));
                }
                if !levy.is_empty() {
                    return Err(Error::Unsupported(
                        "a Gaussian message requires an empty Levy measure".into(),
                    ));
                }
            }
        }
        Ok(Self {
            snr,
            grid,
            levy,
            message,
            strict_positivity: true,
            lambda_floor: LAMBDA_FLOOR,
            max_expected_jumps: MAX_EXPECTED_JUMPS,
            check_assumptions: false,
        })
    }

    /// Finite-hypothesis scenario from parts.
    pub fn finite(
        snr: f64,
        grid: TimeGrid,
        levy: LevyMeasure,
        hypotheses: Vec<Hypothesis>,
    ) -> Result<Self> {
        Self::new(snr, grid, levy, Message::Finite(HypothesisSet::new(hypotheses)?))
    }

    pub fn with_strict_positivity(mut self, on: bool) -> Self {
        self.strict_positivity = on;
        self
    }

    pub fn with_lambda_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::validation("lambda_floor", "must be positive"));
        }
        self.lambda_floor = floor;
        Ok(self)
    }

    pub fn with_max_expected_jumps(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::validation("max_expected_jumps", "must be positive"));
        }
        self.max_expected_jumps = threshold;
        Ok(self)
    }

    pub fn with_assumption_check(mut self, on: bool) -> Self {
        self.check_assumptions = on;
        self
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_snr(mut self, snr: f64) -> Result<Self> {
        if !(snr >= 0.0) || !snr.is_finite() {
            return Err(Error::validation("snr", "snr must be finite and nonnegative"));
        }
        self.snr = snr;
        Ok(self)
    }

    /// Same channel, different message law.
    pub fn with_message(&self, message: Message) -> Result<Self> {
        let mut next = Self::new(self.snr, self.grid, self.levy.clone(), message)?;
        next.strict_positivity = self.strict_positivity;
        next.lambda_floor = self.lambda_floor;
        next.max_expected_jumps = self.max_expected_jumps;
        next.check_assumptions = self.check_assumptions;
        Ok(next)
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn levy(&self) -> &LevyMeasure {
        &self.levy
    }

    pub fn message(&self) -> &Message {
        &self.message
    }

    pub fn hypotheses(&self) -> Option<&HypothesisSet> {
        match &self.message {
            Message::Finite(set) => Some(set),
            Message::Gaussian { .. } => None,
        }
    }

    /// Number of message values the filter tracks (0 for a Gaussian message).
    pub fn message_count(&self) -> usize {
        self.hypotheses().map_or(0, HypothesisSet::len)
    }

    pub fn strict_positivity(&self) -> bool {
        self.strict_positivity
    }

    pub fn lambda_floor(&self) -> f64 {
        self.lambda_floor
    }

    pub fn max_expected_jumps(&self) -> f64 {
        self.max_expected_jumps
    }

    pub fn check_assumptions(&self) -> bool {
        self.check_assumptions
    }

    /// Whether `other` describes the same channel (SNR, grid and jump measure),
    /// so that both can filter the same observations.
    pub fn same_channel(&self, other: &ScenarioConfig) -> Result<()> {
        if self.snr != other.snr {
            return Err(Error::validation("snr", "models disagree on snr"));
        }
        if self.grid != other.grid {
            return Err(Error::validation("grid", "models disagree on the time grid"));
        }
        if self.levy != other.levy {
            return Err(Error::validation("levy", "models disagree on the Levy measure"));
        }
        match (&self.message, &other.message) {
            (Message::Finite(_), Message::Finite(_))
            | (Message::Gaussian { .. }, Message::Gaussian { .. }) => Ok(()),
            _ => Err(Error::validation(
                "message",
                "cannot mix finite and Gaussian message models",
            )),
        }
    }
}

/// Predictable characteristics of the output under a given input.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristics {
    pub drift_rate: f64,
    pub diffusion_rate: f64,
    pub jump_intensity: Vec<f64>,
}

/// Drift `√γ·β + γ·Σ_{|z|<1} z(λ_j − 1)ν_j`, unit diffusion and jump
/// intensities `γ·λ_j·ν_j`.
pub fn compute_characteristics(
    scenario: &ScenarioConfig,
    beta: f64,
    lambdas: &[f64],
) -> Result<Characteristics> {
    let atoms = scenario.levy().atoms();
    if lambdas.len() != atoms.len() {
        return Err(Error::validation(
            "lambdas",
            format!("expected {} intensities, got {}", atoms.len(), lambdas.len()),
        ));
    }
    if lambdas.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::validation("lambdas", "intensities must be nonnegative"));
    }
    let g = scenario.snr();
    let small: f64 = atoms
        .iter()
        .zip(lambdas)
        .filter(|(a, _)| a.size.abs() < 1.0)
        .map(|(a, &l)| a.size * (l - 1.0) * a.rate)
        .sum();
    Ok(Characteristics {
        drift_rate: g.sqrt() * beta + g * small,
        diffusion_rate: 1.0,
        jump_intensity: atoms.iter().zip(lambdas).map(|(a, &l)| g * l * a.rate).collect(),
    })
}
