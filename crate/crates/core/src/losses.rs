//! The two Bregman losses that pair with the Gaussian and Poisson parts of
//! the channel:
//!
//! * `ℓ_G(x, y) = ½(x − y)²`, generated by `f(x) = ½x²`;
//! * `ℓ_P(x, y) = x·ln(x/y) − x + y`, generated by `f(x) = x·ln x`.
//!
//! Both are Bregman divergences, so the mean is their unique minimizer and
//! the excess loss of any other point decomposes orthogonally
//! (see [`bregman_mean_decomposition_check`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A loss value; never negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LossValue(f64);

impl LossValue {
    fn new(v: f64) -> Self {
        // Round-off can push x ln(x/y) - x + y a hair below zero when x ≈ y.
        LossValue(v.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<LossValue> for f64 {
    fn from(v: LossValue) -> f64 {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Gauss,
    Poisson,
}

pub fn gauss_loss(x: f64, y: f64) -> LossValue {
    let d = x - y;
    LossValue::new(0.5 * d * d)
}

/// `x·ln(x/y) − x + y` with `0·ln 0 = 0`.
pub fn poisson_loss(x: f64, y: f64) -> Result<LossValue> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("poisson loss needs x >= 0 (got {x})")));
    }
    if !(y > 0.0) {
        return Err(Error::Domain(format!("poisson loss needs y > 0 (got {y})")));
    }
    if x == 0.0 {
        return Ok(LossValue::new(y));
    }
    Ok(LossValue::new(x * (x / y).ln() - x + y))
}

pub fn loss(kind: LossKind, x: f64, y: f64) -> Result<LossValue> {
    match kind {
        LossKind::Gauss => Ok(gauss_loss(x, y)),
        LossKind::Poisson => poisson_loss(x, y),
    }
}

/// Both sides of the Bregman mean decomposition
/// `mean_i d(X_i, u) = mean_i d(X_i, X̄) + d(X̄, u)`.
pub fn bregman_mean_decomposition_check(
    samples: &[f64],
    u: f64,
    kind: LossKind,
) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::validation("samples", "need at least one sample"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut lhs = 0.0;
    let mut spread = 0.0;
    for &x in samples {
        lhs += loss(kind, x, u)?.value();
        spread += loss(kind, x, mean)?.value();
    }
    let rhs = spread / n + loss(kind, mean, u)?.value();
    Ok((lhs / n, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_loss(3.0, 1.0).value(), 2.0);
        assert_eq!(gauss_loss(-7.25, -7.25).value(), 0.0);
        assert_eq!(gauss_loss(0.5, -0.5).value(), 0.5);
    }

    #[test]
    fn poisson_examples() {
        let v = poisson_loss(2.0, 1.0).unwrap().value();
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((v - 0.386294).abs() < 1e-6);
        assert_eq!(poisson_loss(4.5, 4.5).unwrap().value(), 0.0);
        assert_eq!(poisson_loss(0.0, 3.0).unwrap().value(), 3.0);
    }

    #[test]
    fn poisson_domain_errors() {
        assert!(matches!(poisson_loss(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(poisson_loss(1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(poisson_loss(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(poisson_loss(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let (l, r) = bregman_mean_decomposition_check(&[1.0, 3.0], 1.0, LossKind::Gauss).unwrap();
        assert_eq!((l, r), (1.0, 1.0));
        let (l, r) = bregman_mean_decomposition_check(&[2.5], 2.5, LossKind::Poisson).unwrap();
        assert_eq!((l, r), (0.0, 0.0));

        // Direct evaluation: mean = 1.5.
        let lp = |x: f64, y: f64| x * (x / y).ln() - x + y;
        let lhs = (lp(1.0, 3.0) + lp(2.0, 3.0)) / 2.0;
        let rhs = (lp(1.0, 1.5) + lp(2.0, 1.5)) / 2.0 + lp(1.5, 3.0);
        assert!((lhs - rhs).abs() < 1e-14);
        let (l, r) =
            bregman_mean_decomposition_check(&[1.0, 2.0], 3.0, LossKind::Poisson).unwrap();
        assert!((l - lhs).abs() < 1e-14 && (r - rhs).abs() < 1e-14);
        assert!(bregman_mean_decomposition_check(&[], 1.0, LossKind::Gauss).is_err());
        assert!(bregman_mean_decomposition_check(&[1.0], 0.0, LossKind::Poisson).is_err());
    }

    proptest! {
        #[test]
        fn losses_are_nonnegative(x in 0.0f64..1e3, y in 1e-9f64..1e3) {
            prop_assert!(gauss_loss(x, y).value() >= 0.0);
            prop_assert!(poisson_loss(x, y).unwrap().value() >= 0.0);
        }

        #[test]
        fn zero_only_on_the_diagonal(x in 1e-3f64..1e3, eps in 1e-3f64..0.5) {
            prop_assert_eq!(poisson_loss(x, x).unwrap().value(), 0.0);
            prop_assert!(poisson_loss(x, x * (1.0 + eps)).unwrap().value() > 0.0);
            prop_assert!(gauss_loss(x, x + eps).value() > 0.0);
        }

        #[test]
        fn mean_decomposition_holds(samples in prop::collection::vec(0.0f64..20.0, 1..40),
                                    u in 0.01f64..20.0) {
            for kind in [LossKind::Gauss, LossKind::Poisson] {
                let (l, r) = bregman_mean_decomposition_check(&samples, u, kind).unwrap();
                prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(r.abs()).max(1e-3),
                             "{:?}: {} vs {}", kind, l, r);
            }
        }

        #[test]
        fn sample_mean_minimizes_average_loss(samples in prop::collection::vec(0.1f64..10.0, 2..30)) {
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let avg = |kind, u| samples.iter()
                .map(|&x| loss(kind, x, u).unwrap().value())
                .sum::<f64>() / samples.len() as f64;
            for kind in [LossKind::Gauss, LossKind::Poisson] {
                let best = avg(kind, mean);
                for i in 1..200 {
                    let u = i as f64 * 0.06;
                    prop_assert!(avg(kind, u) >= best - 1e-12);
                }
            }
        }
    }
}
