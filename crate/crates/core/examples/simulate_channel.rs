//! Simulate a few paths of the jump-diffusion feedback preset and print a
//! summary of each, then dump them as CSV to standard output when asked.
//!
//!     cargo run --example simulate_channel [-- --csv]

use semichan::channel::simulate_from_prior;
use semichan::io::write_paths_csv;
use semichan::rng::derive_seed;
use semichan::scenarios::preset_jump_diffusion_feedback;

fn main() -> semichan::Result<()> {
    let preset = preset_jump_diffusion_feedback(1.0, 1.0, 500)?;
    let cfg = &preset.config;
    let paths = (0..4)
        .map(|i| simulate_from_prior(cfg, derive_seed(2024, i)))
        .collect::<semichan::Result<Vec<_>>>()?;

    if std::env::args().any(|a| a == "--csv") {
        write_paths_csv(&mut std::io::stdout().lock(), &paths)?;
        return Ok(());
    }
    for p in &paths {
        let y = p.y_series();
        let jumps: u32 = p.jump_counts.iter().sum();
        println!(
            "message {} ({}): Y(T) = {:+.4}, {jumps} jumps, min Y = {:+.3}, max Y = {:+.3}",
            p.alpha_index,
            cfg.hypotheses().unwrap().get(p.alpha_index).unwrap().label,
            y.last().unwrap(),
            y.iter().copied().fold(f64::INFINITY, f64::min),
            y.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
    }
    Ok(())
}
