use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One jump size together with its rate under the reference measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub size: f64,
    pub rate: f64,
}

/// A Lévy measure with finitely many atoms.
///
/// `small_jump_drift` is the per-unit-time compensator offset
/// `c0 = -Σ_{|z|<1} z·ν(z)`; the channel output carries `γ·c0·t` as a
/// deterministic drift so that small jumps enter compensated.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    atoms: Vec<Atom>,
    small_jump_drift: f64,
}

impl LevyMeasure {
    /// The empty measure (pure Gaussian channel).
    pub fn empty() -> Self {
        Self {
            atoms: Vec::new(),
            small_jump_drift: 0.0,
        }
    }

    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
        for &(size, rate) in atoms {
            if !size.is_finite() || size == 0.0 {
                return Err(Error::validation("levy.atoms", "jump size must be nonzero"));
            }
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::validation("levy.atoms", "jump rate must be positive"));
            }
            out.push(Atom { size, rate });
        }
        out.sort_by(|a, b| a.size.total_cmp(&b.size));
        if out.windows(2).any(|w| w[0].size == w[1].size) {
            return Err(Error::validation("levy.atoms", "duplicate jump size"));
        }
        let small_jump_drift = compensator_offset(&out);
        Ok(Self {
            atoms: out,
            small_jump_drift,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn small_jump_drift(&self) -> f64 {
        self.small_jump_drift
    }

    pub fn sizes(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.size).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.rate).collect()
    }

    /// Pairs `(size, rate)` in sorted order, as written to scenario files.
    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|a| (a.size, a.rate)).collect()
    }
}

fn compensator_offset(atoms: &[Atom]) -> f64 {
    -atoms
        .iter()
        .filter(|a| a.size.abs() < 1.0)
        .map(|a| a.size * a.rate)
        .sum::<f64>()
}

pub fn validate_levy_measure(atoms: &[(f64, f64)]) -> Result<LevyMeasure> {
    LevyMeasure::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn poisson_channel_measure() {
        let m = validate_levy_measure(&[(1.0, 1.0)]).unwrap();
        assert_eq!(m.small_jump_drift(), 0.0);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn small_jump_offset() {
        let m = validate_levy_measure(&[(0.5, 2.0)]).unwrap();
        assert_eq!(m.small_jump_drift(), -1.0);
    }

    #[test]
    fn rejects_invalid_atoms() {
        let err = validate_levy_measure(&[(0.0, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("jump size must be nonzero"));
        assert!(validate_levy_measure(&[(1.0, 0.0)]).is_err());
        assert!(validate_levy_measure(&[(1.0, -2.0)]).is_err());
        let err = validate_levy_measure(&[(1.0, 1.0), (1.0, 2.0)]).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn atoms_are_sorted() {
        let m = validate_levy_measure(&[(1.0, 0.5), (-0.5, 1.0)]).unwrap();
        assert_eq!(m.sizes(), vec![-0.5, 1.0]);
        assert_eq!(m.small_jump_drift(), 0.5);
    }

    proptest! {
        #[test]
        fn large_jumps_have_no_offset(sizes in prop::collection::btree_set(1u32..50, 1..6),
                                      rate in 0.01f64..5.0, neg in any::<bool>()) {
            let atoms: Vec<(f64, f64)> = sizes.iter()
                .map(|&s| (if neg { -(s as f64) } else { s as f64 }, rate))
                .collect();
            let m = LevyMeasure::new(&atoms).unwrap();
            prop_assert_eq!(m.small_jump_drift(), 0.0);
        }

        #[test]
        fn offset_is_recomputable(raw in prop::collection::vec((-3.0f64..3.0, 0.01f64..4.0), 0..6)) {
            let atoms: Vec<(f64, f64)> = raw.into_iter().filter(|(z, _)| *z != 0.0).collect();
            if let Ok(m) = LevyMeasure::new(&atoms) {
                let again: f64 = -m.atoms().iter()
                    .filter(|a| a.size.abs() < 1.0)
                    .map(|a| a.size * a.rate)
                    .sum::<f64>();
                prop_assert!((again - m.small_jump_drift()).abs() <= 1e-12 * (1.0 + again.abs()));
            }
        }
    }
}
