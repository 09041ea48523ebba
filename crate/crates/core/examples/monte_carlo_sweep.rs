//! Reproducible parallel Monte Carlo: the standard error shrinks like
//! 1/√n, and the result does not depend on the worker count.

use semichan::info::{estimate_mi_with, mi_path_values, RouteChoice};
use semichan::io::scenario_fingerprint;
use semichan::mc::{convergence_sweep, McJob, Route};
use semichan::scenarios::preset_bpsk_gaussian;

fn main() -> semichan::Result<()> {
    let cfg = preset_bpsk_gaussian(1.0, 1.0, 400)?.config;
    let fp = scenario_fingerprint(&cfg);
    let sweep = convergence_sweep(&McJob::new(16_000, 9), &[1_000, 4_000, 16_000], Route::Loss, &fp, |_, s| {
        Ok(mi_path_values(&cfg, s)?.0)
    })?;
    for e in &sweep {
        println!("n = {:>6}: {:.5} ± {:.5}", e.n_paths, e.value, e.std_error);
    }

    let a = estimate_mi_with(&McJob::new(2_000, 3).with_workers(1), &cfg, RouteChoice::Both)?.to_json()?;
    let b = estimate_mi_with(&McJob::new(2_000, 3).with_workers(4), &cfg, RouteChoice::Both)?.to_json()?;
    println!("1 vs 4 workers identical: {}", a == b);
    println!("{a}");
    Ok(())
}
