//! Simulation and estimation for jump-diffusion (semi-martingale) channels.
//!
//! A message drives the drift of a Brownian component and the intensities
//! of a finite set of jump sizes. The crate simulates such channels, runs the
//! exact discrete-time Bayesian filter, and estimates mutual information and
//! relative entropy two ways: as integrated causal estimation loss, and as
//! the average log-likelihood ratio. It also computes the Doob–Meyer split of
//! log-likelihood ratios into a loss compensator and a martingale.

pub mod channel;
pub mod cli;
pub mod doob_meyer;
pub mod error;
pub mod filter;
pub mod info;
pub mod io;
pub mod losses;
pub mod mc;
pub mod model;
pub mod rng;
pub mod scenarios;
pub mod verify;

pub use channel::{
    project_observable, simulate_from_prior, simulate_path, validate_assumptions, AssumptionReport,
    ObservablePath, PathRecord,
};
pub use doob_meyer::{decompose_density, decompose_relative, DecompositionTrace};
pub use error::{Error, Result};
pub use filter::{filter_scenario, kalman_filter_gaussian, mismatched_filter_pair, run_filter, FilterTrace};
pub use info::{estimate_kl, estimate_kl_with, estimate_mi, estimate_mi_with, RouteChoice, RouteEstimates};
pub use losses::{gauss_loss, poisson_loss, LossKind};
pub use mc::{convergence_sweep, run_mc, InfoEstimate, McJob, Route};
pub use model::{
    make_time_grid, validate_levy_measure, Encoding, EncodingSpec, History, Hypothesis, HypothesisSet,
    LevyMeasure, Message, ScenarioConfig, TimeGrid,
};
