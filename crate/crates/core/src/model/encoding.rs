//! Encodings: how a message value drives the channel's drift and jump
//! intensities, possibly through feedback on the past output.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The output history visible to an encoding evaluated at step `k`, i.e. at
/// time `t_k`.
///
/// Only increments `0..k` are exposed, so nothing at or after `t_k` can be
/// read. `y()` is the output value `Y(t_k)` accumulated from those
/// increments.
#[derive(Debug, Clone, Copy)]
pub struct History<'a> {
    step: usize,
    time: f64,
    y: f64,
    cont: &'a [f64],
    jumps: &'a [u32],
    n_atoms: usize,
}

impl<'a> History<'a> {
    pub(crate) fn new(
        step: usize,
        time: f64,
        y: f64,
        cont: &'a [f64],
        jumps: &'a [u32],
        n_atoms: usize,
    ) -> Self {
        debug_assert_eq!(cont.len(), step);
        debug_assert_eq!(jumps.len(), step * n_atoms);
        Self {
            step,
            time,
            y,
            cont,
            jumps,
            n_atoms,
        }
    }

    /// Index of the step about to be taken.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `Y(t_k)`: the output at the current node, built from past increments.
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Continuous increments of the completed steps.
    pub fn cont_increments(&self) -> &'a [f64] {
        self.cont
    }

    /// Per-atom jump counts of completed step `i < step()`.
    pub fn jump_counts(&self, i: usize) -> &'a [u32] {
        &self.jumps[i * self.n_atoms..(i + 1) * self.n_atoms]
    }

    /// Number of completed steps (the history length).
    pub fn len(&self) -> usize {
        self.cont.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cont.is_empty()
    }
}

/// Maps the visible history to the drift `β` and per-atom intensity
/// multipliers `λ` of one message value.
///
/// Implementations must be pure functions of their arguments: the
/// simulator and every filter evaluate them independently on the same
/// history and rely on getting the same answer.
pub trait Encoding: Send + Sync + fmt::Debug {
    fn drift(&self, history: &History<'_>) -> f64;

    /// Intensity multiplier for the atom with index `atom` and jump size `size`.
    fn jump_scale(&self, history: &History<'_>, atom: usize, size: f64) -> f64;

    /// Declarative form, when the encoding has one; needed for scenario export.
    fn to_spec(&self) -> Option<EncodingSpec> {
        None
    }
}

/// Declarative encoding families that scenario files can carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncodingSpec {
    /// Constant drift and intensities. An empty `lambda` means `λ ≡ 1`.
    Constant {
        beta: f64,
        #[serde(default)]
        lambda: Vec<f64>,
    },
    /// Values switch at the given times; segment `i` covers
    /// `[breakpoints[i-1], breakpoints[i])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        beta: Vec<f64>,
        #[serde(default)]
        lambda: Vec<Vec<f64>>,
    },
    /// Output feedback: the drift is `beta_below` while `Y(t-) < threshold`
    /// and `beta_above` otherwise; each atom of size `z` gets intensity
    /// `exp(lambda_gain · z · tanh(Y(t-)))` clamped to
    /// `[lambda_min, lambda_max]`.
    Feedback {
        threshold: f64,
        beta_below: f64,
        beta_above: f64,
        lambda_gain: f64,
        lambda_min: f64,
        lambda_max: f64,
    },
}

impl EncodingSpec {
    pub fn constant(beta: f64, lambda: Vec<f64>) -> Self {
        EncodingSpec::Constant { beta, lambda }
    }

    /// Checks internal consistency against a measure with `n_atoms` atoms.
    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        let check_lambda = |l: &[f64]| -> Result<()> {
            if !l.is_empty() && l.len() != n_atoms {
                return Err(Error::validation(
                    "encoding.lambda",
                    format!("expected {n_atoms} intensities, got {}", l.len()),
                ));
            }
            if l.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::validation(
                    "encoding.lambda",
                    "intensities must be finite and nonnegative",
                ));
            }
            Ok(())
        };
        match self {
            EncodingSpec::Constant { beta, lambda } => {
                if !beta.is_finite() {
                    return Err(Error::validation("encoding.beta", "must be finite"));
                }
                check_lambda(lambda)
            }
            EncodingSpec::PiecewiseConstant {
                breakpoints,
                beta,
                lambda,
            } => {
                if beta.len() != breakpoints.len() + 1 {
                    return Err(Error::validation(
                        "encoding.beta",
                        "piecewise encodings need one more value than breakpoints",
                    ));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::validation(
                        "encoding.breakpoints",
                        "breakpoints must be strictly increasing",
                    ));
                }
                if !lambda.is_empty() && lambda.len() != beta.len() {
                    return Err(Error::validation(
                        "encoding.lambda",
                        "piecewise lambda needs one row per segment",
                    ));
                }
                lambda.iter().try_for_each(|row| check_lambda(row))
            }
            EncodingSpec::Feedback {
                lambda_min,
                lambda_max,
                ..
            } => {
                if !(*lambda_min >= 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
                    return Err(Error::validation(
                        "encoding.lambda_min",
                        "need 0 <= lambda_min <= lambda_max < inf",
                    ));
                }
                Ok(())
            }
        }
    }

    fn segment(breakpoints: &[f64], t: f64) -> usize {
        breakpoints.partition_point(|&b| b <= t)
    }
}

impl Encoding for EncodingSpec {
    fn drift(&self, h: &History<'_>) -> f64 {
        match self {
            EncodingSpec::Constant { beta, .. } => *beta,
            EncodingSpec::PiecewiseConstant {
                breakpoints, beta, ..
            } => beta[Self::segment(breakpoints, h.time())],
            EncodingSpec::Feedback {
                threshold,
                beta_below,
                beta_above,
                ..
            } => {
                if h.y() < *threshold {
                    *beta_below
                } else {
                    *beta_above
                }
            }
        }
    }

    fn jump_scale(&self, h: &History<'_>, atom: usize, size: f64) -> f64 {
        match self {
            EncodingSpec::Constant { lambda, .. } => lambda.get(atom).copied().unwrap_or(1.0),
            EncodingSpec::PiecewiseConstant {
                breakpoints,
                lambda,
                ..
            } => {
                if lambda.is_empty() {
                    return 1.0;
                }
                let row = &lambda[Self::segment(breakpoints, h.time())];
                row.get(atom).copied().unwrap_or(1.0)
            }
            EncodingSpec::Feedback {
                lambda_gain,
                lambda_min,
                lambda_max,
                ..
            } => (lambda_gain * size * h.y().tanh())
                .exp()
                .clamp(*lambda_min, *lambda_max),
        }
    }

    fn to_spec(&self) -> Option<EncodingSpec> {
        Some(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(y: f64, t: f64) -> History<'static> {
        History::new(0, t, y, &[], &[], 0)
    }

    #[test]
    fn constant_defaults_to_unit_intensity() {
        let e = EncodingSpec::constant(0.5, vec![]);
        assert_eq!(e.drift(&hist(0.0, 0.0)), 0.5);
        assert_eq!(e.jump_scale(&hist(0.0, 0.0), 3, 1.0), 1.0);
    }

    #[test]
    fn piecewise_segments() {
        let e = EncodingSpec::PiecewiseConstant {
            breakpoints: vec![0.5],
            beta: vec![1.0, -1.0],
            lambda: vec![vec![2.0], vec![3.0]],
        };
        e.validate(1).unwrap();
        assert_eq!(e.drift(&hist(0.0, 0.25)), 1.0);
        assert_eq!(e.drift(&hist(0.0, 0.5)), -1.0);
        assert_eq!(e.jump_scale(&hist(0.0, 0.75), 0, 1.0), 3.0);
    }

    #[test]
    fn feedback_threshold_and_clamp() {
        let e = EncodingSpec::Feedback {
            threshold: 0.0,
            beta_below: 1.0,
            beta_above: 0.5,
            lambda_gain: 1.0,
            lambda_min: 0.1,
            lambda_max: 10.0,
        };
        assert_eq!(e.drift(&hist(-0.1, 0.0)), 1.0);
        assert_eq!(e.drift(&hist(0.0, 0.0)), 0.5);
        let l = e.jump_scale(&hist(0.3, 0.0), 0, 1.0);
        assert!((l - 0.3f64.tanh().exp()).abs() < 1e-15);
        assert_eq!(e.jump_scale(&hist(100.0, 0.0), 0, 1.0e3), 10.0);
        assert_eq!(e.jump_scale(&hist(-100.0, 0.0), 0, 1.0e3), 0.1);
    }

    #[test]
    fn validation_catches_shape_errors() {
        assert!(EncodingSpec::constant(0.0, vec![1.0, 2.0]).validate(1).is_err());
        assert!(EncodingSpec::constant(0.0, vec![-1.0]).validate(1).is_err());
        let bad = EncodingSpec::PiecewiseConstant {
            breakpoints: vec![0.5],
            beta: vec![1.0],
            lambda: vec![],
        };
        assert!(bad.validate(0).is_err());
    }

    #[test]
    fn json_tagging() {
        let e: EncodingSpec =
            serde_json::from_str(r#"{"type":"constant","beta":1.0,"lambda":[2.0]}"#).unwrap();
        assert_eq!(e, EncodingSpec::constant(1.0, vec![2.0]));
        assert!(serde_json::from_str::<EncodingSpec>(r#"{"type":"quadratic"}"#).is_err());
    }
}
