//! Split the information density of one path into its loss compensator and
//! martingale part, and show the explicit innovation integral converging to
//! the residual as the grid is refined.

use semichan::channel::{project_observable, simulate_from_prior};
use semichan::doob_meyer::decompose_density;
use semichan::filter::filter_scenario;
use semichan::scenarios::preset_jump_diffusion_feedback;

fn main() -> semichan::Result<()> {
    for steps in [250, 1000, 4000] {
        let cfg = preset_jump_diffusion_feedback(1.0, 1.0, steps)?.config;
        let truth = simulate_from_prior(&cfg, 12)?;
        let trace = filter_scenario(&project_observable(&truth), &cfg)?;
        let d = decompose_density(&truth, &trace, &cfg)?;
        println!(
            "{steps:>5} steps: target(T) {:+.4} = A(T) {:.4} + M(T) {:+.4}; max |M_explicit - M_residual| {:.2e}; A monotone: {}",
            d.target[steps],
            d.compensator[steps],
            d.martingale_residual[steps],
            d.max_discrepancy(),
            d.is_monotone()
        );
    }
    Ok(())
}
