//! Acceptance criteria 1–9 at their full pinned sizes. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use semichan::verify::{run_criterion, VerifyOptions};

fn main() {
    let opts = VerifyOptions::default();
    let mut failed = 0;
    for id in 1..=9u8 {
        let started = std::time::Instant::now();
        match run_criterion(id, &opts) {
            Ok(r) => {
                println!("{r} [{:.1}s]", started.elapsed().as_secs_f64());
                failed += usize::from(!r.passed);
            }
            Err(e) => {
                println!("[FAIL] criterion {id}: error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
