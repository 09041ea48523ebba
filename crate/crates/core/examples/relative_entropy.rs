//! Relative entropy between output laws under a wrong prior, and the
//! mismatch penalty that equals it.

use semichan::info::{estimate_kl, RouteChoice};
use semichan::scenarios::{preset_bpsk_gaussian, preset_mismatch_pair};

fn main() -> semichan::Result<()> {
    let base = preset_bpsk_gaussian(1.0, 1.0, 500)?;
    for q_prior in [[0.5, 0.5], [0.7, 0.3], [0.9, 0.1], [0.99, 0.01]] {
        let (p, q) = preset_mismatch_pair(&base, &q_prior)?;
        let r = estimate_kl(&p, &q, RouteChoice::Both, 4_000, 5)?;
        let (l, d) = (r.loss.unwrap(), r.density.unwrap());
        println!(
            "q = {q_prior:?}: mismatch penalty {:.5} ± {:.5}, log-likelihood ratio {:.5} ± {:.5}",
            l.value, l.std_error, d.value, d.std_error
        );
    }
    Ok(())
}
