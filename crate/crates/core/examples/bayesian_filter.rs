//! Run the exact discrete-time filter on one simulated path and watch the
//! posterior concentrate on the true message.

use semichan::channel::{project_observable, simulate_path};
use semichan::filter::run_filter;
use semichan::scenarios::preset_poisson_binary;

fn main() -> semichan::Result<()> {
    // λ ∈ {1, 4}: unit jumps, no information in the Brownian part.
    let cfg = preset_poisson_binary(4.0, 2.0, 4000, 1.0, 4.0)?.config;
    let truth = simulate_path(&cfg, 1, 17)?;
    let trace = run_filter(&project_observable(&truth), &cfg)?;

    println!("true message: {}", cfg.hypotheses().unwrap().get(1).unwrap().label);
    println!("{:>6} {:>8} {:>8} {:>10}", "t", "w_low", "w_high", "lambda_hat");
    for k in (0..4000).step_by(400) {
        let w = trace.weights(k);
        println!(
            "{:>6.2} {:>8.4} {:>8.4} {:>10.4}",
            cfg.grid().node(k),
            w[0],
            w[1],
            trace.lambda_hat(k)[0]
        );
    }
    let w = trace.weights(4000);
    println!("final weights: {:.4} / {:.4}", w[0], w[1]);
    Ok(())
}
