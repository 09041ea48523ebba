//! Domain types shared by every other module: time grids, finite-support
//! Lévy measures, encodings, scenario configuration and predictable
//! characteristics.

mod encoding;
mod grid;
mod levy;
mod scenario;

pub use encoding::{Encoding, EncodingSpec, History};
pub use grid::{make_time_grid, TimeGrid};
pub use levy::{validate_levy_measure, Atom, LevyMeasure};
pub use scenario::{
    compute_characteristics, Characteristics, Hypothesis, HypothesisSet, Message,
    ScenarioConfig, LAMBDA_FLOOR, MAX_EXPECTED_JUMPS,
};
